//! memloop: simulation and I-V characterization of active memristors.
//!
//! The toolkit models a two-port device containing a memristor with
//! piecewise-linear memristance drift plus an internal current source,
//! drives it with discrete voltage sweeps, and analyzes the resulting
//! traces: hysteresis quantification, loop classification, segment
//! tangent fits, lobe asymmetry, internal-battery extraction, and full
//! parameter estimation from measured or synthetic data.
//!
//! Typical flow:
//!
//! ```
//! use memloop::devices::{ActiveMemristorParams, InternalSourceSpec, Polarity};
//! use memloop::waveforms::WaveformSpec;
//! use memloop::simulator::run_sweep;
//! use memloop::analysis::{analyze, AnalysisConfig, Classification};
//!
//! let params = ActiveMemristorParams::passive(1e6, 1e3, 2.88e3, 1e5, 1e7)
//!     .with_source(InternalSourceSpec::constant(2e-9, Polarity::Additive));
//! let spec = WaveformSpec::triangular(0.1, 2.0, 160);
//! let (trace, _) = run_sweep(&params, &spec, None).unwrap();
//! let report = analyze(&trace, &AnalysisConfig::default()).unwrap();
//! assert_eq!(report.classification, Classification::Pinched);
//! ```

pub mod analysis;
pub mod cli;
pub mod dataio;
pub mod devices;
pub mod error;
pub mod estimation;
pub mod simulator;
pub mod waveforms;

pub use error::{Error, Result};
