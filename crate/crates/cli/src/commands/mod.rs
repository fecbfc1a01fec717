pub mod analyze;
pub mod fock;
pub mod simulate;
pub mod spectrum;
pub mod wigner;
