pub mod fit;
pub mod linear;
pub mod lower_bound;
pub mod simulate;
pub mod symbol;
