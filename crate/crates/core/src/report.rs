//! CSV emission. Floats are written with 17 significant digits so that files
//! round-trip and are byte-stable across runs.

use std::path::Path;

use crate::caputo::{q3, rho_star, KernelRow};
use crate::diagnostics::EnergySeries;
use crate::error::{Error, Result};
use crate::experiments::{ManufacturedResult, TableCell};
use crate::mesh::TemporalMesh;

/// `x` with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Three significant digits with a two-digit exponent, e.g. `3.89e-06`.
pub fn sci3(x: f64) -> String {
    let s = format!("{x:.2e}");
    match s.split_once('e') {
        Some((mant, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ("-", d),
                None => ("+", exp),
            };
            format!("{mant}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

/// In-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        self.write_into(&mut w)?;
        let bytes = w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Numeric(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Numeric(format!("{}: {e}", path.display())))?;
        self.write_into(&mut w)?;
        w.flush().map_err(|e| Error::Numeric(e.to_string()))
    }

    fn write_into<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        let io = |e: csv::Error| Error::Numeric(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        Ok(())
    }
}

pub fn mesh_table(mesh: &TemporalMesh) -> Table {
    let mut t = Table::new(&["k", "t_k", "tau_k", "rho_k"]);
    for (k, tk, tau, rho) in mesh.rows() {
        t.push(vec![k.to_string(), num(tk), opt(tau), opt(rho)]);
    }
    t
}

/// One row per `k = 1..n`.
pub fn kernel_table(row: &KernelRow) -> Table {
    let n = row.level;
    let mut t = Table::new(&["k", "c", "d", "B", "c_tilde", "J"]);
    for k in 1..=n {
        let j = n - k;
        t.push(vec![
            k.to_string(),
            num(row.c[j]),
            num(row.d[j]),
            num(row.b[j]),
            num(row.c_tilde[j]),
            num(row.j[j]),
        ]);
    }
    t
}

pub fn rho_star_table(alphas: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["alpha", "rho_star"]);
    for &a in alphas {
        t.push(vec![num(a), num(rho_star(a)?)]);
    }
    Ok(t)
}

pub fn q3_table(rhos: &[f64], alphas: &[f64]) -> Table {
    let mut t = Table::new(&["rho", "alpha", "q3"]);
    for &a in alphas {
        for &r in rhos {
            t.push(vec![num(r), num(a), num(q3(r, a))]);
        }
    }
    t
}

pub fn energy_table(e: &EnergySeries) -> Table {
    let mut t = Table::new(&["n", "t_n", "E", "E_modified"]);
    for i in 0..e.levels.len() {
        t.push(vec![
            e.levels[i].to_string(),
            num(e.times[i]),
            num(e.free_energy[i]),
            opt(e.modified_energy[i]),
        ]);
    }
    t
}

pub fn mass_table(e: &EnergySeries) -> Table {
    let mut t = Table::new(&["n", "t_n", "mass"]);
    for i in 0..e.levels.len() {
        t.push(vec![
            e.levels[i].to_string(),
            num(e.times[i]),
            num(e.mass[i]),
        ]);
    }
    t
}

/// `N,error,order` for a single series.
pub fn convergence_table(cells: &[TableCell]) -> Table {
    let mut t = Table::new(&["N", "error", "order"]);
    for c in cells {
        t.push(vec![c.n.to_string(), num(c.error), opt(c.order)]);
    }
    t
}

pub fn order_table(cells: &[TableCell]) -> Table {
    let mut t = Table::new(&["alpha", "N", "error", "order"]);
    for c in cells {
        t.push(vec![
            num(c.alpha),
            c.n.to_string(),
            num(c.error),
            opt(c.order),
        ]);
    }
    t
}

pub fn manufactured_profile_table(results: &[ManufacturedResult]) -> Table {
    let mut t = Table::new(&["alpha", "x", "exact", "numeric", "abs_error"]);
    for r in results {
        for &(x, e, v) in &r.profile {
            t.push(vec![
                num(r.alpha),
                num(x),
                num(e),
                num(v),
                num((e - v).abs()),
            ]);
        }
    }
    t
}

pub fn manufactured_summary_table(results: &[ManufacturedResult]) -> Table {
    let mut t = Table::new(&["alpha", "max_error"]);
    for r in results {
        t.push(vec![num(r.alpha), num(r.max_error)]);
    }
    t
}

/// Text rendering: one block per order, three significant digits.
pub fn render_order_table(cells: &[TableCell]) -> String {
    let mut s = String::new();
    let mut last = f64::NAN;
    for c in cells {
        if c.alpha != last {
            s.push_str(&format!(
                "alpha = {}\n{:>6}  {:>9}  {:>6}\n",
                c.alpha, "N", "e(N)", "order"
            ));
            last = c.alpha;
        }
        let o = c
            .order
            .map(|o| format!("{o:.3}"))
            .unwrap_or_else(|| "--".into());
        s.push_str(&format!("{:>6}  {:>9}  {:>6}\n", c.n, sci3(c.error), o));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formats() {
        assert_eq!(sci3(3.891e-6), "3.89e-06");
        assert_eq!(sci3(1.5e12), "1.50e+12");
        let s = num(0.1);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(s.split('e').next().unwrap().replace('.', "").len(), 17);
    }

    #[test]
    fn mesh_csv_layout() {
        let m = TemporalMesh::uniform(2, 1.0).unwrap();
        let csv = mesh_table(&m).to_csv_string().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,t_k,tau_k,rho_k");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",,"));
    }
}
