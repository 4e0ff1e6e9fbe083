//! File formats: JSON for structured artifacts (problems, response
//! matrices, reconstructions) and CSV for tabular reports.
//!
//! Every format stores the lattice shape so readers can rebuild the graph
//! and check that the data actually fits it.  Floating point numbers are
//! written with enough digits to parse back to the identical value, so
//! `parse(serialize(x)) = x` holds exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{ConductivityField, DtnMatrix};
use crate::lattice::{Corner, Lattice};
use crate::reconstruction::{CornerChoice, Reconstruction, ReconstructOptions};
use crate::verification::{ErrorReport, StudyTable};

/// Writes any serializable artifact as pretty-printed JSON.
pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Reads a JSON artifact written by [`save_json`].
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

/// Provenance carried along with a generated problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Human-readable description of the sampling distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
}

/// One edge of a problem file: endpoint coordinates and conductivity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemEdge {
    pub p: Vec<i32>,
    pub q: Vec<i32>,
    pub gamma: f64,
}

/// A full conductivity problem: lattice shape plus one positive value per
/// edge, listed in canonical edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub dim: usize,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<ProblemMetadata>,
    pub edges: Vec<ProblemEdge>,
}

impl ProblemFile {
    pub fn new(lat: &Lattice, g: &ConductivityField, metadata: Option<ProblemMetadata>) -> Self {
        let edges = (0..lat.num_edges())
            .map(|e| {
                let (a, b) = lat.edge(e);
                ProblemEdge {
                    p: lat.coords(a).to_vec(),
                    q: lat.coords(b).to_vec(),
                    gamma: g.at(e),
                }
            })
            .collect();
        ProblemFile {
            dim: lat.dim(),
            size: lat.size(),
            metadata,
            edges,
        }
    }

    /// Builds the lattice this file describes.
    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::build(self.dim, self.size)
    }

    /// Validates the edge list against `lat` and returns the conductivity.
    ///
    /// The list must enumerate the canonical edge order exactly, and every
    /// value must be finite and positive.
    pub fn conductivity(&self, lat: &Lattice) -> Result<ConductivityField> {
        if self.dim != lat.dim() || self.size != lat.size() {
            return Err(Error::LatticeMismatch(format!(
                "problem file is d={} n={}, expected d={} n={}",
                self.dim,
                self.size,
                lat.dim(),
                lat.size()
            )));
        }
        if self.edges.len() != lat.num_edges() {
            return Err(Error::Schema(format!(
                "problem file lists {} edges, lattice has {}",
                self.edges.len(),
                lat.num_edges()
            )));
        }
        let mut values = Vec::with_capacity(self.edges.len());
        for (e, entry) in self.edges.iter().enumerate() {
            let (a, b) = lat.edge(e);
            if entry.p != lat.coords(a) || entry.q != lat.coords(b) {
                return Err(Error::Schema(format!(
                    "edge {e} is {:?}-{:?}, canonical order expects {:?}-{:?}",
                    entry.p,
                    entry.q,
                    lat.coords(a),
                    lat.coords(b)
                )));
            }
            if !entry.gamma.is_finite() || entry.gamma <= 0.0 {
                return Err(Error::Schema(format!(
                    "edge {e}: conductivity {} is not positive",
                    entry.gamma
                )));
            }
            values.push(entry.gamma);
        }
        ConductivityField::from_values(lat, values)
    }
}

/// Invariant measurements recorded when a response matrix is written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnMetadata {
    pub symmetry_defect: f64,
    pub row_sum_defect: f64,
}

/// A boundary response matrix with its node ordering spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtnFile {
    pub dim: usize,
    pub size: usize,
    /// Boundary node coordinates in row (and column) order.
    pub node_order: Vec<Vec<i32>>,
    /// Row-major matrix entries, `node_order.len()` squared of them.
    pub matrix: Vec<f64>,
    pub metadata: DtnMetadata,
}

impl DtnFile {
    pub fn new(lat: &Lattice, dtn: &DtnMatrix) -> Self {
        let node_order = lat
            .boundary_nodes()
            .map(|b| lat.coords(b).to_vec())
            .collect();
        let m = dtn.matrix();
        let mut matrix = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                matrix.push(m[(r, c)]);
            }
        }
        DtnFile {
            dim: lat.dim(),
            size: lat.size(),
            node_order,
            matrix,
            metadata: DtnMetadata {
                symmetry_defect: dtn.symmetry_defect(),
                row_sum_defect: dtn.row_sum_defect(),
            },
        }
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::build(self.dim, self.size)
    }

    /// Validates ordering and shape against `lat` and rebuilds the matrix.
    pub fn to_dtn(&self, lat: &Lattice) -> Result<DtnMatrix> {
        if self.dim != lat.dim() || self.size != lat.size() {
            return Err(Error::LatticeMismatch(format!(
                "response file is d={} n={}, expected d={} n={}",
                self.dim,
                self.size,
                lat.dim(),
                lat.size()
            )));
        }
        let nb = lat.num_boundary();
        if self.node_order.len() != nb {
            return Err(Error::Schema(format!(
                "node order lists {} boundary nodes, lattice has {nb}",
                self.node_order.len()
            )));
        }
        for (i, b) in lat.boundary_nodes().enumerate() {
            if self.node_order[i] != lat.coords(b) {
                return Err(Error::Schema(format!(
                    "boundary node {i} is {:?}, canonical order expects {:?}",
                    self.node_order[i],
                    lat.coords(b)
                )));
            }
        }
        if self.matrix.len() != nb * nb {
            return Err(Error::Schema(format!(
                "matrix has {} entries, expected {}",
                self.matrix.len(),
                nb * nb
            )));
        }
        if let Some(bad) = self.matrix.iter().find(|v| !v.is_finite()) {
            return Err(Error::Schema(format!("matrix entry {bad} is not finite")));
        }
        let m = DMatrix::from_fn(nb, nb, |r, c| self.matrix[r * nb + c]);
        DtnMatrix::from_matrix(lat, m)
    }
}

/// One reconstructed edge: endpoints, estimate and the corner it came
/// from.  Uncovered edges keep `gamma_est` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconEdge {
    pub p: Vec<i32>,
    pub q: Vec<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_est: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner: Option<String>,
}

/// Per-level numerical health record, one per corner and level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub corner: String,
    pub level: usize,
    pub kernel_dim: usize,
    pub kernel_dim_by_tol: usize,
    pub expected_dim: usize,
    pub degraded: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_warning: Option<(f64, f64)>,
    pub containment_defect: f64,
    pub excitations: usize,
    pub flux_rows: usize,
    pub flux_cols: usize,
    pub flux_rank: usize,
    pub rank_deficient: bool,
    pub lstsq_residual: f64,
    pub max_march_residual: f64,
    pub sanitized_values: usize,
    pub nonpositive_edges: usize,
}

/// A reconstruction result with full diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconFile {
    pub dim: usize,
    pub size: usize,
    /// Rank tolerance the kernel dimensions were thresholded with.
    pub tol: f64,
    /// Corner selection: `"all"` or `"origin"`.
    pub corners: String,
    pub max_level: usize,
    pub auto_extended: bool,
    pub edges: Vec<ReconEdge>,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

/// Text form of a corner selection strategy.
pub fn corner_choice_label(choice: CornerChoice) -> &'static str {
    match choice {
        CornerChoice::All => "all",
        CornerChoice::Origin => "origin",
    }
}

/// Parses the form produced by [`corner_choice_label`].
pub fn parse_corner_choice(label: &str) -> Result<CornerChoice> {
    match label {
        "all" => Ok(CornerChoice::All),
        "origin" => Ok(CornerChoice::Origin),
        other => Err(Error::Schema(format!(
            "corner selection must be \"all\" or \"origin\", got \"{other}\""
        ))),
    }
}

impl ReconFile {
    pub fn new(lat: &Lattice, recon: &Reconstruction, opts: &ReconstructOptions) -> Self {
        let edges = (0..lat.num_edges())
            .map(|e| {
                let (a, b) = lat.edge(e);
                ReconEdge {
                    p: lat.coords(a).to_vec(),
                    q: lat.coords(b).to_vec(),
                    gamma_est: recon.estimates[e],
                    corner: recon.sources[e].as_ref().map(|c| c.label()),
                }
            })
            .collect();
        let mut diagnostics = Vec::new();
        for run in &recon.corner_runs {
            for d in &run.slices {
                diagnostics.push(DiagnosticsRecord {
                    corner: run.corner.label(),
                    level: d.level,
                    kernel_dim: d.kernel_dim,
                    kernel_dim_by_tol: d.kernel_dim_by_tol,
                    expected_dim: d.expected_dim,
                    degraded: d.degraded,
                    gap_warning: d.gap_warning,
                    containment_defect: d.containment_defect,
                    excitations: d.excitations,
                    flux_rows: d.flux_rows,
                    flux_cols: d.flux_cols,
                    flux_rank: d.flux_rank,
                    rank_deficient: d.rank_deficient,
                    lstsq_residual: d.lstsq_residual,
                    max_march_residual: d.max_march_residual,
                    sanitized_values: d.sanitized_values,
                    nonpositive_edges: d.nonpositive_edges,
                });
            }
        }
        ReconFile {
            dim: lat.dim(),
            size: lat.size(),
            tol: opts.rank_tol,
            corners: corner_choice_label(opts.corners).into(),
            max_level: recon.max_level,
            auto_extended: recon.auto_extended,
            edges,
            diagnostics,
        }
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::build(self.dim, self.size)
    }

    /// Validates against `lat` and rebuilds the estimate and source lists.
    /// The per-corner runs are not stored in the file, so the returned
    /// reconstruction carries none.
    pub fn to_reconstruction(&self, lat: &Lattice) -> Result<Reconstruction> {
        if self.dim != lat.dim() || self.size != lat.size() {
            return Err(Error::LatticeMismatch(format!(
                "reconstruction file is d={} n={}, expected d={} n={}",
                self.dim,
                self.size,
                lat.dim(),
                lat.size()
            )));
        }
        if self.edges.len() != lat.num_edges() {
            return Err(Error::Schema(format!(
                "reconstruction lists {} edges, lattice has {}",
                self.edges.len(),
                lat.num_edges()
            )));
        }
        parse_corner_choice(&self.corners)?;
        let mut estimates = Vec::with_capacity(self.edges.len());
        let mut sources = Vec::with_capacity(self.edges.len());
        for (e, entry) in self.edges.iter().enumerate() {
            let (a, b) = lat.edge(e);
            if entry.p != lat.coords(a) || entry.q != lat.coords(b) {
                return Err(Error::Schema(format!(
                    "edge {e} is {:?}-{:?}, canonical order expects {:?}-{:?}",
                    entry.p,
                    entry.q,
                    lat.coords(a),
                    lat.coords(b)
                )));
            }
            let corner = match &entry.corner {
                None => None,
                Some(label) => {
                    let c = Corner::from_label(label).ok_or_else(|| {
                        Error::Schema(format!("edge {e}: bad corner label \"{label}\""))
                    })?;
                    if c.dim() != lat.dim() {
                        return Err(Error::Schema(format!(
                            "edge {e}: corner \"{label}\" has wrong dimension"
                        )));
                    }
                    Some(c)
                }
            };
            if entry.gamma_est.is_some() != corner.is_some() {
                return Err(Error::Schema(format!(
                    "edge {e}: estimate and corner must be present together"
                )));
            }
            estimates.push(entry.gamma_est);
            sources.push(corner);
        }
        Ok(Reconstruction {
            estimates,
            sources,
            corner_runs: Vec::new(),
            max_level: self.max_level,
            auto_extended: self.auto_extended,
        })
    }
}

fn coords_field(coords: &[f64]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn int_coords_field(coords: &[i32]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes the per-edge error report as CSV.
///
/// Coordinate-valued columns hold space-separated components; optional
/// columns are empty for uncovered edges.
pub fn write_error_report(path: &Path, lat: &Lattice, report: &ErrorReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "p",
        "q",
        "midpoint",
        "depth",
        "gamma_true",
        "gamma_est",
        "abs_err",
        "log10_err",
        "corner",
    ])?;
    for entry in &report.entries {
        let (a, b) = lat.edge(entry.edge);
        w.write_record([
            int_coords_field(lat.coords(a)),
            int_coords_field(lat.coords(b)),
            coords_field(&entry.midpoint),
            entry.depth.to_string(),
            entry.gamma_true.to_string(),
            entry.gamma_est.map(|v| v.to_string()).unwrap_or_default(),
            entry.abs_err.map(|v| v.to_string()).unwrap_or_default(),
            entry.log10_err.map(|v| v.to_string()).unwrap_or_default(),
            entry
                .corner
                .as_ref()
                .map(|c| c.label())
                .unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the error growth study as CSV, one row per lattice size.
///
/// `decades_vs_first` is the growth of the worst log error relative to the
/// first row.
pub fn write_study(path: &Path, table: &StudyTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "size",
        "edges",
        "max_abs_err",
        "max_log10_err",
        "median_log10_err",
        "shallow_median_log10",
        "deep_median_log10",
        "decades_vs_first",
        "seconds",
    ])?;
    let base = table.rows.first().map(|r| r.max_log10_err).unwrap_or(0.0);
    for row in &table.rows {
        w.write_record([
            row.size.to_string(),
            row.edges.to_string(),
            row.max_abs_err.to_string(),
            row.max_log10_err.to_string(),
            row.median_log10_err.to_string(),
            row.shallow_median_log10.to_string(),
            row.deep_median_log10.to_string(),
            (row.max_log10_err - base).to_string(),
            row.seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::assemble_dtn;
    use crate::reconstruction::reconstruct;
    use crate::verification::{compare, error_growth_study};

    fn setup(dim: usize, size: usize, seed: u64) -> (Lattice, ConductivityField) {
        let lat = Lattice::build(dim, size).unwrap();
        let g = ConductivityField::random_uniform(&lat, 0.5, 2.0, seed).unwrap();
        (lat, g)
    }

    #[test]
    fn problem_files_round_trip_exactly() {
        let (lat, g) = setup(3, 2, 5);
        let meta = ProblemMetadata {
            seed: Some(5),
            distribution: Some("uniform 0.5..2".into()),
        };
        let file = ProblemFile::new(&lat, &g, Some(meta));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("problem.json");
        save_json(&path, &file).unwrap();
        let back: ProblemFile = load_json(&path).unwrap();
        assert_eq!(back, file);
        let g2 = back.conductivity(&lat).unwrap();
        for e in 0..lat.num_edges() {
            assert_eq!(g.at(e).to_bits(), g2.at(e).to_bits());
        }
    }

    #[test]
    fn problem_validation_rejects_bad_files() {
        let (lat, g) = setup(2, 2, 0);
        let good = ProblemFile::new(&lat, &g, None);

        let mut reordered = good.clone();
        reordered.edges.swap(0, 1);
        assert!(matches!(
            reordered.conductivity(&lat),
            Err(Error::Schema(_))
        ));

        let mut negative = good.clone();
        negative.edges[3].gamma = -1.0;
        assert!(matches!(negative.conductivity(&lat), Err(Error::Schema(_))));

        let mut truncated = good.clone();
        truncated.edges.pop();
        assert!(matches!(
            truncated.conductivity(&lat),
            Err(Error::Schema(_))
        ));

        let other = Lattice::build(2, 3).unwrap();
        assert!(matches!(
            good.conductivity(&other),
            Err(Error::LatticeMismatch(_))
        ));
    }

    #[test]
    fn response_files_round_trip_exactly() {
        let (lat, g) = setup(2, 3, 1);
        let dtn = assemble_dtn(&lat, &g).unwrap();
        let file = DtnFile::new(&lat, &dtn);
        assert_eq!(file.node_order.len(), lat.num_boundary());
        assert!(file.metadata.symmetry_defect <= 1e-12);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dtn.json");
        save_json(&path, &file).unwrap();
        let back: DtnFile = load_json(&path).unwrap();
        assert_eq!(back, file);
        let dtn2 = back.to_dtn(&lat).unwrap();
        assert_eq!(dtn.matrix(), dtn2.matrix());

        let mut shuffled = file.clone();
        shuffled.node_order.swap(0, 1);
        assert!(matches!(shuffled.to_dtn(&lat), Err(Error::Schema(_))));

        let mut short = file.clone();
        short.matrix.pop();
        assert!(matches!(short.to_dtn(&lat), Err(Error::Schema(_))));
    }

    #[test]
    fn reconstruction_files_round_trip() {
        let (lat, g) = setup(2, 2, 7);
        let dtn = assemble_dtn(&lat, &g).unwrap();
        let opts = ReconstructOptions::default();
        let recon = reconstruct(&lat, &dtn, &opts).unwrap();
        let file = ReconFile::new(&lat, &recon, &opts);
        assert_eq!(file.corners, "all");
        assert!(!file.diagnostics.is_empty());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("recon.json");
        save_json(&path, &file).unwrap();
        let back: ReconFile = load_json(&path).unwrap();
        assert_eq!(back, file);
        let recon2 = back.to_reconstruction(&lat).unwrap();
        assert_eq!(recon.estimates, recon2.estimates);
        for e in 0..lat.num_edges() {
            assert_eq!(
                recon.sources[e].as_ref().map(|c| c.label()),
                recon2.sources[e].as_ref().map(|c| c.label())
            );
        }

        let mut bad = file.clone();
        bad.edges[0].corner = Some("2x".into());
        assert!(matches!(bad.to_reconstruction(&lat), Err(Error::Schema(_))));
    }

    #[test]
    fn report_csv_has_one_row_per_edge() {
        let (lat, g) = setup(2, 2, 3);
        let dtn = assemble_dtn(&lat, &g).unwrap();
        let recon = reconstruct(&lat, &dtn, &ReconstructOptions::default()).unwrap();
        let report = compare(&lat, &g, &recon).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        write_error_report(&path, &lat, &report).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), lat.num_edges());
        for row in &rows {
            assert_eq!(row.len(), 9);
            let err: f64 = row[6].parse().unwrap();
            assert!(err <= 1e-9);
            assert_eq!(row[0].split(' ').count(), 2);
        }
    }

    #[test]
    fn study_csv_lists_each_size() {
        let table = error_growth_study(2, &[2, 3], 1.0, 2.0, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("study.csv");
        write_study(&path, &table).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][0], "2");
        assert_eq!(&rows[1][0], "3");
        let first_decades: f64 = rows[0][7].parse().unwrap();
        assert_eq!(first_decades, 0.0);
    }
}
