//! Pseudo-spectral simulation and diagnostics for two-dimensional
//! Oldroyd-B type viscoelastic models on the periodic box `[0, L)²`.

pub mod spectral;
pub mod fields;
pub mod littlewood_paley;
pub mod dynamics;
pub mod diagnostics;
pub mod init_data;
pub mod cli_io;
