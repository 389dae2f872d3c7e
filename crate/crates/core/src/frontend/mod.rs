//! Parsing, desugaring, kind/type checking and scheduling.

pub mod ast;
pub mod desugar;
pub mod lexer;
pub mod parser;
pub mod schedule;
pub mod typing;

pub use ast::Program;
pub use desugar::desugar;
pub use parser::{parse, parse_with_globals};
pub use schedule::{schedule, schedule_program, ScheduledBlock, TieBreak};
pub use typing::{kind_check, Kind, TypeExpr, TypedProgram};
