pub mod certgen;
pub mod interp;
pub mod poly;
pub mod sas;
pub mod sdp;
pub mod validate;
