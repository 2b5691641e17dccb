//! Command-line front end: single checks with machine-readable reports and
//! the repeatable benchmark suites.

pub mod args;
pub mod bench;
pub mod check;
pub mod report;

pub use args::{BenchArgs, CheckArgs, Cli, Command};
pub use check::run_check;
pub use report::RunReport;

/// Process exit status for a verdict.
pub fn exit_code(assertion: hyperpstl::smc::Assertion) -> i32 {
    match assertion {
        hyperpstl::smc::Assertion::True | hyperpstl::smc::Assertion::False => 0,
        hyperpstl::smc::Assertion::Undecided => 2,
    }
}
