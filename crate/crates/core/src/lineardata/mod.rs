//! Linear-mapping data: the association recursion, enumeration of the
//! association tree, and the determinant test for a single mapping.

mod derive;
mod n1;
mod tree;

pub use derive::{derive_datum, linear_field, signature, zero_coefficients, DerivationStep, Signature, ZERO_CHECK_GRID};
pub use n1::{n1_check, n1_matrix_alpha, N1Report};
pub use tree::{enumerate_associated, AssociationNode, AssociationTree};
