//! Text formats: Matrix Market for symmetric matrices, CSV for samples,
//! libsvm for labeled data and a sparse listing for trained weights.

mod libsvm;
mod mtx;
mod samples;
mod weights;

pub use libsvm::{read_libsvm, write_libsvm};
pub use mtx::{read_matrix_market, write_matrix_market};
pub use samples::{read_samples_csv, write_samples_csv};
pub use weights::{read_model, write_model};

use crate::error::Error;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T, Error> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}
