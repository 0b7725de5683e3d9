pub mod cli;
pub mod convert;
pub mod label;
pub mod layout;
pub mod model;
pub mod pipeline;
pub mod render;
pub mod style;
pub mod syntax;
