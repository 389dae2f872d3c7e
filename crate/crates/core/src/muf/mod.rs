//! Transition-function IR: allocation, compilation, evaluation.

pub mod alloc;
pub mod compile;
pub mod eval;
pub mod interp;
pub mod pretty;
pub mod term;

pub use alloc::allocate;
pub use compile::{compile_program, Compiler};
pub use eval::{eval, step_node, Deterministic, Env, Handler, Runtime};
pub use interp::Interp;
pub use term::{MufDef, MufPattern, MufProgram, MufTerm};
