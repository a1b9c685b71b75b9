//! Reference implementations used only by tests. Each one avoids the code
//! path it checks: dense matrices instead of the statevector kernels, naive
//! DFTs instead of FFTs, Jacobi rotations instead of library eigensolvers,
//! projected gradient instead of pairwise updates, and exhaustive threshold
//! counting instead of the ROC sweep.
#![allow(dead_code)]

pub mod dense_gate;
pub mod linalg;
pub mod metrics;
pub mod qp;
