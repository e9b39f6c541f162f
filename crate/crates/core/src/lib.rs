pub mod catmodel;
pub mod fock;
pub mod krylov;
pub mod liouville;
pub mod numerics;
pub mod wigner;
