//! Angle files: CSV with one angle column and an optional group column.
//!
//! Empty cells and the literal `NA` are missing values. Degrees are
//! converted to radians as the file is read.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use hypercirc_core::CircularSample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

impl AngleUnit {
    pub fn to_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Radians => value,
            AngleUnit::Degrees => value.to_radians(),
        }
    }

    pub fn from_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Radians => value,
            AngleUnit::Degrees => value.to_degrees(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleFile {
    pub path: PathBuf,
    pub unit: AngleUnit,
    pub header: bool,
}

impl AngleFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        AngleFile {
            path: path.into(),
            unit: AngleUnit::Radians,
            header: true,
        }
    }

    pub fn unit(mut self, unit: AngleUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn header(mut self, header: bool) -> Self {
        self.header = header;
        self
    }

    pub fn read(&self) -> Result<Vec<Group>> {
        let file = File::open(&self.path).map_err(|e| Error::io(&self.path, e))?;
        let mut groups = parse_angles(file, &self.path.display().to_string(), self.unit, self.header)?;
        if groups.len() == 1 && groups[0].name.is_none() {
            groups[0].name = Some(file_stem(&self.path));
        }
        Ok(groups)
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Observations of one group, in file order, in radians.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Group {
    pub name: Option<String>,
    pub values: Vec<Option<f64>>,
}

impl Group {
    pub fn missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    pub fn label(&self, fallback: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("group {fallback}"))
    }

    /// The sample, provided nothing is missing.
    pub fn complete(&self, fallback: usize) -> Result<CircularSample> {
        let label = self.label(fallback);
        let values: Option<Vec<f64>> = self.values.iter().copied().collect();
        let values = values.ok_or_else(|| {
            Error::Data(format!(
                "{label}: {} missing value(s); impute them or remove the rows",
                self.missing()
            ))
        })?;
        if values.is_empty() {
            return Err(Error::Data(format!("{label}: no observations")));
        }
        Ok(CircularSample::from_radians(&values)?.with_label(label))
    }
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NA"
}

fn unquote(cell: &str) -> &str {
    cell.strip_prefix('"')
        .and_then(|c| c.strip_suffix('"'))
        .unwrap_or(cell)
        .trim()
}

/// Parses `angle[,group]` records. Groups are returned in order of first
/// appearance; a file without a group column yields one unnamed group.
///
/// Lines are split by hand rather than with a CSV reader because a blank
/// line in a single-column file is a missing value, not a separator. Blank
/// lines at the end of the input are ignored.
pub fn parse_angles(mut reader: impl Read, input: &str, unit: AngleUnit, header: bool) -> Result<Vec<Group>> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io(input, e))?;
    let parse_error = |line: usize, message: String| Error::Parse {
        input: input.to_string(),
        line: line as u64,
        message,
    };

    let lines: Vec<&str> = text.lines().collect();
    let used = lines.len() - lines.iter().rev().take_while(|l| l.trim().is_empty()).count();
    let mut groups: Vec<Group> = Vec::new();
    let mut columns = None;
    for (i, raw) in lines[..used].iter().enumerate() {
        let line = i + 1;
        if i == 0 && header {
            continue;
        }
        let cells: Vec<&str> = raw.split(',').map(|c| unquote(c.trim())).collect();
        let width = cells.len();
        if !(1..=2).contains(&width) {
            return Err(parse_error(line, format!("expected 1 or 2 columns, found {width}")));
        }
        match columns {
            None => columns = Some(width),
            Some(c) if c != width => {
                return Err(parse_error(line, format!("expected {c} columns, found {width}")));
            }
            _ => {}
        }

        let cell = cells[0];
        let value = if is_missing(cell) {
            None
        } else {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_error(line, format!("not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(parse_error(line, format!("angle must be finite, got {cell}")));
            }
            Some(unit.to_radians(v))
        };

        let name = if width == 2 {
            if cells[1].is_empty() {
                return Err(parse_error(line, "empty group label".into()));
            }
            Some(cells[1])
        } else {
            None
        };
        let slot = match groups.iter().position(|g| g.name.as_deref() == name) {
            Some(i) => i,
            None => {
                groups.push(Group {
                    name: name.map(String::from),
                    values: Vec::new(),
                });
                groups.len() - 1
            }
        };
        groups[slot].values.push(value);
    }
    if groups.is_empty() {
        return Err(Error::Data(format!("{input}: no observations")));
    }
    Ok(groups)
}

/// Reads one or two files into exactly two groups.
pub fn read_two_groups(files: &[AngleFile]) -> Result<[Group; 2]> {
    let mut groups = Vec::new();
    for f in files {
        groups.extend(f.read()?);
    }
    let count = groups.len();
    let two: [Group; 2] = groups
        .try_into()
        .map_err(|_| Error::Data(format!("expected exactly two groups, found {count}")))?;
    if two[0].name.is_some() && two[0].name == two[1].name {
        let name = two[0].name.clone().unwrap_or_default();
        return Err(Error::Data(format!("both groups are named {name:?}")));
    }
    Ok(two)
}

/// Writes angles as CSV with a header, optionally with a group column.
pub fn write_angles(
    out: impl std::io::Write,
    sample: &CircularSample,
    unit: AngleUnit,
    group: Option<&str>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match group {
        Some(_) => w.write_record(["angle", "group"])?,
        None => w.write_record(["angle"])?,
    }
    for theta in sample.radians() {
        let v = unit.from_radians(theta).to_string();
        match group {
            Some(g) => w.write_record([v.as_str(), g])?,
            None => w.write_record([v.as_str()])?,
        }
    }
    w.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, header: bool) -> Result<Vec<Group>> {
        parse_angles(text.as_bytes(), "test.csv", AngleUnit::Radians, header)
    }

    #[test]
    fn single_column_with_missing() {
        let g = parse("angle\n0.5\n\nNA\n1.5\n\n", true).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].values, vec![Some(0.5), None, None, Some(1.5)]);
    }

    #[test]
    fn two_columns_keep_order_of_appearance() {
        let g = parse("1,b\n2,a\n3,b\n", false).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].name.as_deref(), Some("b"));
        assert_eq!(g[0].values, vec![Some(1.0), Some(3.0)]);
        assert_eq!(g[1].values, vec![Some(2.0)]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        match parse("angle\n0.1\nabc\n", true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse("0.1\n0.2,g,extra\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse("1,a\n,\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(parse("inf\n", false).is_err());
        assert!(parse("angle\n", true).is_err());
    }

    #[test]
    fn degrees_are_converted() {
        let g = parse_angles("90\n180\n".as_bytes(), "x", AngleUnit::Degrees, false).unwrap();
        assert_eq!(g[0].values, vec![Some(90f64.to_radians()), Some(180f64.to_radians())]);
    }
}
