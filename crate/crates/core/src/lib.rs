pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod material;
pub mod operators;
pub mod phonon_pbc;
pub mod phonon_sphere;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};

pub type MaterialModel = material::MaterialModel<f64>;
pub type Geometry = material::Geometry<f64>;
pub type Shape = material::Shape<f64>;
pub type PbcMode = phonon_pbc::PbcMode<f64>;
pub type SphereMode = phonon_sphere::SphereMode<f64>;
pub type SpheroidalRoot = phonon_sphere::SpheroidalRoot<f64>;

pub use analysis::{ExactCheck, GateVariant, SweepOptions, SweepPoint};
pub use dynamics::{simulate_gate, GateConfig, GateReport, ModelTier, StepControl};
pub use hamiltonian::{DriveConfig, Path};
pub use operators::{HilbertSpace, C64};
