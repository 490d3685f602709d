//! Deterministic phase-space solver for the one-dimensional relativistic
//! Vlasov–wave system
//!
//! ```text
//! ∂t f + v̂ ∂x f − ∂t A ∂v f = 0,    (∂t² − ∂x²) A = j = ∫ v̂ f dv,    v̂ = v / √(1 + v²)
//! ```
//!
//! together with the tools used to check it: a Picard solution map with its
//! hypothesis audit, energy/support/Grönwall diagnostics, an integral
//! representation of `∂x∂tA`, and quadrature checks of the distributional
//! identity behind it.

pub mod app;
pub mod config;
pub mod convergence;
pub mod coupling;
pub mod diagnostics;
pub mod division;
pub mod error;
pub mod grid;
pub mod interp;
pub mod output;
pub mod picard;
pub mod profile;
pub mod state;
pub mod transport;
pub mod wave;

pub use config::{parse_config, Config, Mode};
pub use coupling::{Simulation, SimulationState, TransportMode};
pub use diagnostics::DiagnosticsRecord;
pub use error::{ConfigError, Error, Result};
pub use grid::{build_grid, Axis, DomainBounds, PhaseGrid};
pub use profile::{bump, Bump, InitialData, Profile1d, Profile2d};
pub use state::{DistributionState, FieldState, SupportBox};
pub use transport::{v_hat, FieldHistory};
