//! Finite discrete probability over `(Z, Yc, Yo, Yp)`.

mod distribution;
mod joint;
mod kernel;
mod label;
pub mod random;
mod sample;

pub use distribution::{align, Distribution};
pub use joint::{Assignment, JointDistribution, Supports, Variable};
pub use kernel::{apply_model, deterministic_kernel, ModelKernel};
pub use label::{render_number, Label, Support};
pub use random::{random_joint, random_kernel};
pub use sample::{from_samples, replicate, DeclaredSupports, SampleRecord};
