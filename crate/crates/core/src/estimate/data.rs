use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assortment::Assortment;
use crate::error::{Error, Result};

/// One two-category transaction: offered sets and the option chosen in each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Observation {
    #[serde(rename = "S_A")]
    pub s_a: Assortment,
    #[serde(rename = "S_B")]
    pub s_b: Assortment,
    pub a: usize,
    pub b: usize,
}

impl Observation {
    pub fn new(s_a: impl Into<Assortment>, s_b: impl Into<Assortment>, a: usize, b: usize) -> Self {
        Observation {
            s_a: s_a.into(),
            s_b: s_b.into(),
            a,
            b,
        }
    }

    /// Checks set bounds and that each choice was offered (or is 0).
    pub fn check(&self, n_a: usize, n_b: usize) -> Result<()> {
        self.s_a.check(n_a)?;
        self.s_b.check(n_b)?;
        if self.a != 0 && !self.s_a.contains(self.a) {
            return Err(Error::Data(format!("choice a = {} not offered in {}", self.a, self.s_a)));
        }
        if self.b != 0 && !self.s_b.contains(self.b) {
            return Err(Error::Data(format!("choice b = {} not offered in {}", self.b, self.s_b)));
        }
        Ok(())
    }
}

/// Validates every observation against category sizes.
pub fn check_observations(data: &[Observation], n_a: usize, n_b: usize) -> Result<()> {
    for (t, o) in data.iter().enumerate() {
        o.check(n_a, n_b)
            .map_err(|e| Error::Data(format!("observation {t}: {e}")))?;
    }
    Ok(())
}

/// Smallest category sizes covering every index in `data`.
pub fn infer_sizes(data: &[Observation]) -> (usize, usize) {
    let max = |f: &dyn Fn(&Observation) -> usize| data.iter().map(f).max().unwrap_or(0);
    let n_a = max(&|o| o.s_a.iter().chain([o.a]).max().unwrap_or(0));
    let n_b = max(&|o| o.s_b.iter().chain([o.b]).max().unwrap_or(0));
    (n_a, n_b)
}

/// Reads one JSON observation per non-blank line.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("{}:{}: {e}", path.display(), k + 1)))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names() {
        let o = Observation::new([1, 2], [3], 2, 0);
        let text = serde_json::to_string(&o).unwrap();
        assert_eq!(text, r#"{"S_A":[1,2],"S_B":[3],"a":2,"b":0}"#);
    }

    #[test]
    fn choice_must_be_offered() {
        assert!(Observation::new([1], [2], 1, 2).check(2, 2).is_ok());
        assert!(Observation::new([1], [2], 2, 0).check(2, 2).is_err());
        assert!(Observation::new([1], [2], 1, 1).check(2, 2).is_err());
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("obs.jsonl");
        let data = vec![Observation::new([1], [], 1, 0), Observation::new([], [1, 2], 0, 2)];
        write_jsonl(&path, &data).unwrap();
        assert_eq!(read_jsonl::<Observation>(&path).unwrap(), data);
        assert_eq!(infer_sizes(&data), (1, 2));
    }
}
