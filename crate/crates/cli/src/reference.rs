//! Embedded reference results and the metrics view the trend rules run
//! against (either these reference values or simulated aggregates).

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Density {
    Low,
    High,
}

impl Density {
    pub fn as_str(&self) -> &'static str {
        match self {
            Density::Low => "low",
            Density::High => "high",
        }
    }

    pub fn from_nodes(nodes: usize) -> Density {
        if nodes >= 50 {
            Density::High
        } else {
            Density::Low
        }
    }
}

/// One metric cell: delivery ratio as a fraction, mean delay in seconds,
/// and routing overhead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub pdr: f64,
    pub e2e_s: f64,
    pub overhead: f64,
}

/// Anything the trend rules can interrogate: reference tables or aggregated
/// simulation output. Ratio is in percent (0, 5, 10, 15, 20, 25); ratio 0
/// refers to the unattacked baseline.
pub trait MetricsView {
    fn cell(&self, series: &str, density: Density, ratio_pct: u32) -> Option<Cell>;

    fn label(&self) -> &str;
}

/// Reference values keyed by (series, density, ratio).
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    cells: BTreeMap<(String, Density, u32), Cell>,
}

pub const REFERENCE_CSV: &str = include_str!("../data/reference.csv");

impl ReferenceTable {
    pub fn embedded() -> ReferenceTable {
        Self::parse(REFERENCE_CSV).expect("embedded reference data is well-formed")
    }

    pub fn parse(text: &str) -> Result<ReferenceTable, String> {
        let mut cells = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("series,") {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 6 {
                return Err(format!("reference line {}: expected 6 fields", idx + 1));
            }
            let density = match parts[1] {
                "low" => Density::Low,
                "high" => Density::High,
                other => return Err(format!("reference line {}: bad density `{other}`", idx + 1)),
            };
            let ratio: u32 = parts[2].parse().map_err(|_| format!("line {}: ratio", idx + 1))?;
            let pdr_pct: f64 = parts[3].parse().map_err(|_| format!("line {}: pdr", idx + 1))?;
            let e2e: f64 = parts[4].parse().map_err(|_| format!("line {}: e2e", idx + 1))?;
            let ovh: f64 = parts[5].parse().map_err(|_| format!("line {}: overhead", idx + 1))?;
            cells.insert(
                (parts[0].to_string(), density, ratio),
                Cell { pdr: pdr_pct / 100.0, e2e_s: e2e, overhead: ovh },
            );
        }
        Ok(ReferenceTable { cells })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl MetricsView for ReferenceTable {
    fn cell(&self, series: &str, density: Density, ratio_pct: u32) -> Option<Cell> {
        self.cells.get(&(series.to_string(), density, ratio_pct)).copied()
    }

    fn label(&self) -> &str {
        "reference"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_is_complete() {
        let table = ReferenceTable::embedded();
        // 5 series x 2 densities x 6 ratios.
        assert_eq!(table.len(), 60);
        let c = table.cell("flooding", Density::High, 25).unwrap();
        assert!((c.pdr - 0.627).abs() < 1e-9);
        assert!((c.e2e_s - 0.172).abs() < 1e-9);
        assert!((c.overhead - 8.11).abs() < 1e-9);
        let b = table.cell("sinkhole", Density::Low, 0).unwrap();
        assert!((b.overhead - 7.40).abs() < 1e-9);
    }
}
