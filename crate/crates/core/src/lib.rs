//! Secret-key reversibility analysis for finite tripartite distributions.
//!
//! The crate works on [`JointTable`]s over named variables. Roles X (Alice),
//! Y (Bob) and Z (Eve) are designated by the caller through [`Roles`].

pub mod classes;
pub mod common_info;
pub mod corpus;
pub mod dist;
pub mod entropy;
pub mod error;
pub mod io;
pub mod oracle;
pub mod partitions;
pub mod protocol;
pub mod quantum;
pub mod secrecy;
pub mod view;

pub use dist::{Channel, JointTable};
pub use error::{Error, Result};
pub use view::{Roles, Tripartite};
