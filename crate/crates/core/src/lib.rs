pub mod hessian;
pub mod model;
pub mod polygeom;
pub mod rational;
pub mod regularity;
pub mod subdiff;
