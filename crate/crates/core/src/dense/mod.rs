//! Dense storage, Householder reflectors and compact WY machinery.

mod householder;
pub mod io;
mod matrix;
mod wy;

pub use householder::{apply_reflector, householder, Householder, HouseholderSet, Reflector};
pub(crate) use householder::make_reflector;
pub use matrix::DenseMatrix;
pub use wy::{apply_q_block, apply_qt_block, compact_wy, update_wy, CompactWY};
