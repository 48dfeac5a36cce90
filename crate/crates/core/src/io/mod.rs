//! File formats: distribution JSON, single-law JSON, CSV datasets.

mod csv_io;
mod json;

pub use csv_io::{read_csv, read_csv_path, write_csv, write_csv_path};
pub use json::{
    joint_from_json, joint_to_json, law_from_json, law_to_json, read_joint_path, write_joint_path, DistributionFile,
};
