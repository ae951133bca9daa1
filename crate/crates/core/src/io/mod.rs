//! File formats: PGM masks and the plain-text polygon field format.

mod field_file;
mod pgm;

pub use field_file::{read_field, write_field};
pub use pgm::{read_mask, read_mask_binary, write_mask};
