//! Fixture corpus, consistency suites, conjecture probe and reports for genhess.

pub mod analyze;
pub mod facts;
pub mod fixtures;
pub mod oracle;
pub mod outcome;
pub mod probe;
pub mod report;
pub mod suites;

/// The guide in `book/`, compiled so that its examples run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problem-files.md")]
    mod problem_files {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/hessians.md")]
    mod hessians {}
    #[doc = include_str!("../../../book/src/regularity.md")]
    mod regularity {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/report-schema.md")]
    mod report_schema {}
}
