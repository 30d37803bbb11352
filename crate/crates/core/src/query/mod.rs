//! Filter expressions over the archive: parsing, evaluation to interval sets,
//! time-series aggregation and clip listing.

mod ast;
mod eval;
mod parser;
mod series;

pub use ast::{Commercials, Expr, Filter, HourRange, Tag};
pub use eval::{eval, eval_where, snippet, widen, Evaluation};
pub use parser::parse;
pub use series::{aggregate, clips, Clip, ClipPage, SeriesPoint, TimeSeries, MAX_PAGE_SIZE, SNIPPET_PAD};
