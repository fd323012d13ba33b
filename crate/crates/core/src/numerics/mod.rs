//! Numerical kernels: Gauss-Legendre rules, sine/cosine integrals, the
//! Hermitian Jacobi eigensolver, dense complex matrices and seeded sampling.

pub mod eigen;
pub mod matrix;
pub mod quadrature;
pub mod sampler;
pub mod special;
pub mod summation;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues};
pub use matrix::{ComplexMatrix, LuFactors};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use sampler::{mix_seed, SeededSampler};
pub use special::{cosine_integral, sine_integral};
