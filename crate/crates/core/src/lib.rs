//! Deterministic 2D swarm simulation and analysis toolkit.
//!
//! A swarm of double-integrator agents runs a delayed-attraction controller
//! that settles into a rotating ring. Agents occupy physical space and are
//! destroyed (respawned) on contact, so a collision-avoidance wrapper filters
//! every input: a potential field, a gyroscopic steering force, control
//! barrier certificates, or optimal reciprocal collision avoidance. Ring
//! quality is scored by the fatness/tangentness metrics, and a sweep harness
//! tunes each wrapper's cautiousness parameter over parameter grids.

pub mod avoid;
pub mod delay;
pub mod error;
pub mod metrics;
pub mod output;
pub mod rng;
pub mod sim;
pub mod swarm;
pub mod sweep;
pub mod testing;
pub mod vec2;

pub use avoid::Strategy;
pub use error::Error;
pub use sim::{RunOutput, SimConfig};
pub use swarm::SwarmParams;
pub use vec2::Vec2;
