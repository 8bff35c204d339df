//! The second-variation form `Q_Σ(u,u) = ∫|∇u|² − (Ric_M(N,N) + |A_Σ|²)u² − ∫_{∂Σ} h_{∂M}(N,N)u²`
//! and its volume-constrained spectrum.

mod assemble;
mod spectrum;

pub use assemble::{assemble, ric_normal, JacobiAssembly, JacobiOptions, RicNormal};
pub use spectrum::{cmc_index, complete_spectrum, twisted_spectrum, EpsilonRule, SpectrumOptions, SpectrumRecord, TwistedSpectrum};
