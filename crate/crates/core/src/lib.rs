//! A reactive probabilistic programming language: a synchronous dataflow
//! language extended with `sample`, `observe`, `factor` and `infer`, compiled
//! to transition functions and run with particle filtering or delayed
//! sampling.

pub mod bench;
pub mod dist;
pub mod ds;
pub mod error;
pub mod frontend;
pub mod infer;
pub mod muf;
pub mod names;
pub mod ops;
pub mod value;

use std::collections::HashMap;

pub use dist::Distribution;
pub use error::{Error, Result};
pub use infer::{EngineConfig, EngineKind};
pub use muf::Runtime;
pub use names::Name;
pub use value::Value;

use frontend::{TieBreak, TypeExpr, TypedProgram};
use muf::MufProgram;

/// A program through every front-end pass and the compiler.
pub struct Compiled {
    pub typed: TypedProgram,
    pub program: MufProgram,
}

/// Parses, desugars, checks, schedules and compiles `src`. `globals` are
/// values the program may refer to by name.
pub fn compile_source(src: &str, globals: &HashMap<Name, Value>) -> Result<Compiled> {
    compile_with(src, globals, TieBreak::SourceOrder)
}

pub fn compile_with(src: &str, globals: &HashMap<Name, Value>, tie: TieBreak) -> Result<Compiled> {
    let mut names: Vec<Name> = globals.keys().copied().collect();
    names.sort();
    let prog = frontend::parse_with_globals(src, &names)?;
    let prog = frontend::desugar(prog);
    let typed_globals: Vec<(Name, TypeExpr)> = names.iter().map(|n| (*n, TypeExpr::of_value(&globals[n]))).collect();
    let mut typed = frontend::kind_check(prog, &typed_globals)?;
    frontend::schedule_program(&mut typed.program, tie)?;
    let program = muf::compile_program(&typed);
    Ok(Compiled { typed, program })
}

/// A runtime ready to step the nodes of `src`.
pub fn load(src: &str, globals: HashMap<Name, Value>, config: EngineConfig) -> Result<Runtime> {
    let compiled = compile_source(src, &globals)?;
    Runtime::new(compiled.program, globals, config)
}
