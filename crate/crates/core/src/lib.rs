pub mod finite_type;
pub mod gf2;
pub mod monodromy;
pub mod poly;
pub mod puiseux;
pub mod splice;
pub mod surface_homology;
