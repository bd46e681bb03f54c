// mdbook can't run listings that depend on workspace crates, so each chapter
// is pulled in as a module doc and `cargo test --doc` runs the listings. One
// module per chapter keeps failures traceable to their file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/least-squares.md")]
pub mod least_squares {}
#[doc = include_str!("../../../book/src/encoding.md")]
pub mod encoding {}
#[doc = include_str!("../../../book/src/qubo.md")]
pub mod qubo {}
#[doc = include_str!("../../../book/src/solvers.md")]
pub mod solvers {}
#[doc = include_str!("../../../book/src/iterating.md")]
pub mod iterating {}
#[doc = include_str!("../../../book/src/splines.md")]
pub mod splines {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
