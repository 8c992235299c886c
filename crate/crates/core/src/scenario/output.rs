use std::path::{Path, PathBuf};

use super::config::SweepParameter;

/// Fixed-precision rendering: 17 significant digits in scientific notation,
/// `nan` for undefined values.
pub fn format_value(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub(crate) fn format_option(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), format_value)
}

/// In-memory CSV with a fixed header.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn header(&self) -> &[&'static str] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

/// `dir/stem__param=value.ext` for one sweep point.
pub fn sweep_output_path(base: &Path, parameter: SweepParameter, value: f64) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut name = format!("{stem}__{}={value:?}", parameter.name());
    if let Some(ext) = base.extension() {
        name.push('.');
        name.push_str(&ext.to_string_lossy());
    }
    base.with_file_name(name)
}

/// `dir/stem<suffix>` keeping the original extension, e.g. `x.crossings.csv`.
pub(crate) fn sibling_path(base: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    base.with_file_name(format!("{stem}{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_exactly() {
        for x in [std::f64::consts::E, -1.0 / 3.0, 1e-300, 6.02214076e23, 0.0] {
            let s = format_value(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(format_value(f64::NAN), "nan");
        assert_eq!(format_option(None), "nan");
        assert_eq!(format_value(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn table_renders_header_and_rows() {
        let mut t = CsvTable::new(&["t", "x"]);
        t.push(vec!["0".into(), "1".into()]);
        assert_eq!(t.to_csv(), "t,x\n0,1\n");
    }

    #[test]
    fn sweep_names() {
        let p = sweep_output_path(Path::new("out/run.csv"), SweepParameter::Alpha, 0.5);
        assert_eq!(p, PathBuf::from("out/run__alpha=0.5.csv"));
        let p = sweep_output_path(Path::new("run.csv"), SweepParameter::Hbar, 1e-6);
        assert_eq!(p, PathBuf::from("run__hbar=1e-6.csv"));
        assert_eq!(
            sibling_path(Path::new("a/b.csv"), ".crossings", "csv"),
            PathBuf::from("a/b.crossings.csv")
        );
    }
}
