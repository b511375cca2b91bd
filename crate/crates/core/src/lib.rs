//! Time-resolved transmission of a Gaussian wave packet through a transient
//! parabolic barrier, and the signalling scheme built on it.

pub mod dynamics;
pub mod ode;
pub mod oracle;
pub mod protocol;
pub mod quad;
pub mod superarrival;
pub mod trajectories;
pub mod wavepacket;
