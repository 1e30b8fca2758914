//! Exact images and preimages of H-representation polyhedra under linear
//! maps over the rationals, with nonnegative-multiplier certificates for
//! every derived inequality and a sampling oracle to audit results.

pub mod arith;
mod elim;
pub mod error;
pub mod io;
pub mod oracle;
pub mod polyhedron;
pub mod projection;

pub use arith::{int, parse_rational, ratio, QMatrix, QVector, Rational};
pub use error::{Error, Result};
pub use polyhedron::{HPolyhedron, IneqRow, SignPartition, Supremum};
pub use projection::{
    check_certificate, eliminate_direction, factor_through, image, image_onto_range,
    image_with_kernel, lift_witness, preimage, Certificate, Certified, ImageOptions, LinMap,
    Redundancy,
};
