//! Intrinsic triangulated surfaces, their weighted Laplace spectra, disk surgery
//! (cross-caps and twisted handles), Fourier-space extension operators and
//! conformal first-eigenvalue maximization.

pub mod error;
pub mod extend;
pub mod glue;
pub mod linalg;
pub mod maximize;
pub mod mesh;
pub mod spectrum;
pub mod util;

pub use error::{Error, Result};
pub use extend::{CircleTrace, CylinderField, DiskField};
pub use glue::{GluedSurface, GluingKind, GluingSpec};
pub use maximize::{AscentTrace, BalanceResult, EigenMap};
pub use mesh::{DensityField, IntrinsicMesh, Orientability};
pub use spectrum::{MassMatrix, SpectrumResult, StiffnessMatrix};
