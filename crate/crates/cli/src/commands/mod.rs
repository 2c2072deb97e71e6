pub mod analyze;
pub mod density;
pub mod simulate;
pub mod sweep;
pub mod validate;
