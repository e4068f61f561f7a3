//! On-disk formats shared by the command-line tools.

pub mod dataset;
pub mod hash;

pub use dataset::{read_dataset, write_dataset, write_dataset_csv, DATASET_MAGIC};
pub use hash::sha256_file;
