//! Vee-systems of covectors in three dimensions: verification, flats,
//! deformations, projective reconstruction and a catalogue of known systems.

pub mod catalogue;
pub mod config;
pub mod deform;
pub mod document;
pub mod error;
pub mod expr;
pub mod matroid;
pub mod projgeom;
pub mod relations;
pub mod verify;

pub use catalogue::{Catalogue, Params};
pub use config::{canonical_form, dual, pairing, CanonicalForm, CovectorConfiguration, Tolerance, DEFAULT_RTOL};
pub use deform::{build_system, deformation_dimension, rigidity_test, Mode};
pub use error::{CatalogueError, GeomError, VeeError};
pub use matroid::{decompose, find_isomorphism, fingerprint, same_matroid, FlatDecomposition, Verdict};
pub use verify::{check_extension, check_harmonic, check_vee, nu_trace, solve_weights, VeeReport};
