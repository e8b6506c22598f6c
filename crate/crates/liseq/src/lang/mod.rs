//! Surface syntax, ASTs, scope checking and printing for parameterized
//! (`.pp`) and sequential (`.sp`) programs.
//!
//! ```
//! use liseq::lang;
//!
//! let prog = lang::parse_param("int x; init: skip; process P: main() begin skip; end").unwrap();
//! assert_eq!(prog.processes.len(), 1);
//! let again = lang::parse_param(&lang::print_param(&prog)).unwrap();
//! assert_eq!(prog, again);
//! ```

mod ast;
mod check;
mod diag;
mod lexer;
mod normalize;
mod parser;
mod printer;

pub use ast::*;
pub use check::RESERVED_PREFIX;
pub use diag::{DiagKind, Diagnostic, Diagnostics, Span};
pub use normalize::{is_normalized, normalize, return_global};
pub use parser::SpanTable;
pub use printer::{expr_to_string, print_param, print_seq};

use parser::Parser;

/// Range given to a bare `int`.
pub const DEFAULT_INT: Type = Type::Int { lo: 0, hi: 7 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept identifiers starting with [`RESERVED_PREFIX`]; used when
    /// re-reading normalized programs.
    pub allow_reserved: bool,
    pub default_int: Type,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            allow_reserved: false,
            default_int: DEFAULT_INT,
        }
    }
}

/// Parses and checks a parameterized program.
pub fn parse_param(text: &str) -> Result<ParamProgram, Diagnostics> {
    parse_param_with(text, &ParseOptions::default())
}

pub fn parse_param_with(text: &str, opts: &ParseOptions) -> Result<ParamProgram, Diagnostics> {
    parse_param_spanned(text, opts).map(|(p, _)| p)
}

/// Like [`parse_param_with`], also returning source positions.
pub fn parse_param_spanned(text: &str, opts: &ParseOptions) -> Result<(ParamProgram, SpanTable), Diagnostics> {
    let one = |d: Diagnostic| Diagnostics(vec![d]);
    let mut p = Parser::new(text, opts.default_int).map_err(one)?;
    let prog = p.param_program().map_err(one)?;
    p.finish().map_err(one)?;
    let errs = check::check_param(&prog, &p.spans, opts.allow_reserved);
    if errs.is_empty() {
        Ok((prog, p.spans))
    } else {
        Err(Diagnostics(errs))
    }
}

/// Parses and checks a sequential program. Reserved names are accepted,
/// since generated programs use them.
pub fn parse_seq(text: &str) -> Result<SeqProgram, Diagnostics> {
    parse_seq_with(text, &ParseOptions::default())
}

pub fn parse_seq_with(text: &str, opts: &ParseOptions) -> Result<SeqProgram, Diagnostics> {
    let one = |d: Diagnostic| Diagnostics(vec![d]);
    let mut p = Parser::new(text, opts.default_int).map_err(one)?;
    let prog = p.seq_program().map_err(one)?;
    p.finish().map_err(one)?;
    let errs = check::check_seq(&prog, &p.spans);
    if errs.is_empty() {
        Ok(prog)
    } else {
        Err(Diagnostics(errs))
    }
}

/// Prints either kind of program.
pub fn pretty_print(prog: &Program) -> String {
    match prog {
        Program::Param(p) => print_param(p),
        Program::Seq(p) => print_seq(p),
    }
}

#[cfg(test)]
mod tests;
