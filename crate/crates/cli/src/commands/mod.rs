pub mod construct;
pub mod verify;
