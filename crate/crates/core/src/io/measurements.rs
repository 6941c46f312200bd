//! Long-format measurement tables: `subject,movement,rater,repetition,rom_deg`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::Measurement;

const COLUMNS: [&str; 5] = ["subject", "movement", "rater", "repetition", "rom_deg"];

pub fn read_measurements_csv(path: &Path) -> Result<Vec<Measurement>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?;
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names != COLUMNS {
        return Err(Error::Schema {
            path: path.to_path_buf(),
            message: format!("expected columns {}, found {}", COLUMNS.join(","), names.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<Measurement>().enumerate() {
        let m = row.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 2,
            message: e.to_string(),
        })?;
        if !m.rom_deg.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("rom_deg {} is not finite", m.rom_deg),
            });
        }
        out.push(m);
    }
    Ok(out)
}

pub fn write_measurements_csv(path: &Path, data: &[Measurement]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    for m in data {
        writer.serialize(m).map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Schema {
            path: path.to_path_buf(),
            message: format!("{kind:?}"),
        },
    }
}
