//! Bound states of a hydrogen-like atom confined in an impenetrable sphere,
//! their spherically averaged electron momentum densities, Compton profiles,
//! momentum moments, information measures, and the isoelectronic scaling
//! laws connecting charges Z through the Z = 1 reference problem.
//!
//! Pipeline: [`radial`] solves the Dirichlet radial problem (exact series
//! march), [`momentum`] transforms to p space and builds the EMD, [`compton`]
//! integrates the EMD into the profile J(q), [`infotheory`] characterizes the
//! profile (Shannon entropy, Onicescu energy, entropic moments), and
//! [`scaling`] maps everything between nuclear charges. [`tables`] embeds the
//! reference table data with per-cell erratum flags.
//!
//! All quantities are in Hartree atomic units.

pub mod quad;
pub mod radial;
pub mod specfun;

pub use quad::{integrate_half_line, integrate_oscillatory, integrate_panel, QuadratureSpec};
