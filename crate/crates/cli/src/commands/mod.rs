pub mod bench;
pub mod calibrate;
pub mod codec;
pub mod eval;
pub mod filter;
pub mod info;
pub mod simulate;
pub mod windows;
