//! Performance index, strong-scaling speedup and the freestream scaling
//! campaign.
//!
//! `PID = wall_clock * cores / (DOF * steps * RK stages)`, with DOF counted as
//! solution points.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Instant;

use crate::basis::SpectralBasis;
use crate::config::{RunConfig, StopRule};
use crate::error::{PerfError, SolverError};
use crate::field::ConservativeField;
use crate::mesh::CartesianMesh;
use crate::operator::SpatialOperator;
use crate::solver::HybridSolver;
use crate::timestep::RK_STAGES;
use crate::{cases, config::CaseId};

/// Exact header of the campaign CSV (after the version comment line).
pub const CAMPAIGN_CSV_HEADER: &str =
    "case,n_elements,N,dof_points,cores,steps,rk_stages,repeat_idx,wall_clock_s,pid_s,speedup";
pub const CAMPAIGN_CSV_VERSION: &str = "# dgfv perf v1";
/// Exact header of the speedup summary CSV.
pub const SPEEDUP_CSV_HEADER: &str =
    "case,n_elements,N,dof_points,cores,repeats,mean_wall_clock_s,min_wall_clock_s,max_wall_clock_s,pid_s,speedup,ideal_speedup";
pub const SPEEDUP_CSV_VERSION: &str = "# dgfv speedup v1";

/// Timings of one mesh / core-count combination.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfRecord {
    pub case: String,
    pub n_elements: usize,
    pub degree: usize,
    /// Solution points.
    pub dof_points: usize,
    /// Solution points times conserved variables.
    pub dof_variables: usize,
    pub cores: usize,
    pub steps: usize,
    pub rk_stages: usize,
    /// Time-loop wall clock of every repeat, seconds.
    pub wall_clocks: Vec<f64>,
}

impl PerfRecord {
    pub fn mean_wall_clock(&self) -> f64 {
        self.wall_clocks.iter().sum::<f64>() / self.wall_clocks.len() as f64
    }

    pub fn min_wall_clock(&self) -> f64 {
        self.wall_clocks.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_wall_clock(&self) -> f64 {
        self.wall_clocks.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn problems(&self) -> Vec<String> {
        let mut p = Vec::new();
        let name = &self.case;
        for (field, v) in [
            ("dof_points", self.dof_points),
            ("cores", self.cores),
            ("steps", self.steps),
            ("rk_stages", self.rk_stages),
        ] {
            if v == 0 {
                p.push(format!("{name}: {field} must be positive"));
            }
        }
        if self.wall_clocks.is_empty() {
            p.push(format!("{name}: no wall-clock samples"));
        }
        if let Some(w) = self.wall_clocks.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            p.push(format!("{name}: wall clock {w} must be positive"));
        }
        p
    }
}

/// `wall_clock * cores / (dof * steps * stages)`.
pub fn pid(wall_clock: f64, cores: usize, dof: usize, steps: usize, rk_stages: usize) -> f64 {
    wall_clock * cores as f64 / (dof as f64 * steps as f64 * rk_stages as f64)
}

/// PID of a record from its mean wall clock and point-based DOF count.
pub fn compute_pid(r: &PerfRecord) -> Result<f64, PerfError> {
    let problems = r.problems();
    if !problems.is_empty() {
        return Err(PerfError::Validation(problems));
    }
    Ok(pid(r.mean_wall_clock(), r.cores, r.dof_points, r.steps, r.rk_stages))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedupRow {
    pub case: String,
    pub n_elements: usize,
    pub degree: usize,
    pub dof_points: usize,
    pub cores: usize,
    pub repeats: usize,
    pub mean_wall_clock: f64,
    pub min_wall_clock: f64,
    pub max_wall_clock: f64,
    pub pid: f64,
    /// Mean wall clock at the smallest core count over the mean at `cores`.
    pub speedup: f64,
    /// `cores / smallest core count`.
    pub ideal: f64,
}

/// Groups records by case, mesh and degree, and computes each record's
/// speedup relative to the smallest core count of its group.
pub fn speedup_table(records: &[PerfRecord]) -> Result<Vec<SpeedupRow>, PerfError> {
    let mut problems: Vec<String> = records.iter().flat_map(PerfRecord::problems).collect();
    let mut groups: BTreeMap<(&str, usize, usize), Vec<&PerfRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((&r.case, r.n_elements, r.degree)).or_default().push(r);
    }
    for ((case, n, deg), group) in &groups {
        let first = group[0];
        for r in &group[1..] {
            for (field, a, b) in [
                ("dof_points", first.dof_points, r.dof_points),
                ("dof_variables", first.dof_variables, r.dof_variables),
                ("steps", first.steps, r.steps),
                ("rk_stages", first.rk_stages, r.rk_stages),
            ] {
                if a != b {
                    problems.push(format!(
                        "{case} with {n} elements, N={deg}: {field} differs ({a} at {} cores, {b} at {} cores)",
                        first.cores, r.cores
                    ));
                }
            }
        }
        let mut cores: Vec<usize> = group.iter().map(|r| r.cores).collect();
        cores.sort_unstable();
        if let Some(w) = cores.windows(2).find(|w| w[0] == w[1]) {
            problems.push(format!("{case} with {n} elements, N={deg}: {} cores recorded twice", w[0]));
        }
    }
    if !problems.is_empty() {
        return Err(PerfError::Validation(problems));
    }
    let mut rows = Vec::with_capacity(records.len());
    for group in groups.values_mut() {
        group.sort_by_key(|r| r.cores);
        let base = group[0];
        let base_wall = base.mean_wall_clock();
        for r in group.iter() {
            let mean = r.mean_wall_clock();
            rows.push(SpeedupRow {
                case: r.case.clone(),
                n_elements: r.n_elements,
                degree: r.degree,
                dof_points: r.dof_points,
                cores: r.cores,
                repeats: r.wall_clocks.len(),
                mean_wall_clock: mean,
                min_wall_clock: r.min_wall_clock(),
                max_wall_clock: r.max_wall_clock(),
                pid: pid(mean, r.cores, r.dof_points, r.steps, r.rk_stages),
                speedup: base_wall / mean,
                ideal: r.cores as f64 / base.cores as f64,
            });
        }
    }
    Ok(rows)
}

pub fn speedup_csv(rows: &[SpeedupRow]) -> String {
    let mut s = format!("{SPEEDUP_CSV_VERSION}\n{SPEEDUP_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.case,
            r.n_elements,
            r.degree,
            r.dof_points,
            r.cores,
            r.repeats,
            r.mean_wall_clock,
            r.min_wall_clock,
            r.max_wall_clock,
            r.pid,
            r.speedup,
            r.ideal
        );
    }
    s
}

/// Element layout of a 2D campaign mesh: the most nearly square factorisation
/// `nx * ny = n` with `nx >= ny`.
pub fn mesh_shape(n: usize) -> [usize; 2] {
    let ny = (1..=n).take_while(|d| d * d <= n).filter(|d| n.is_multiple_of(*d)).last().unwrap_or(1);
    [n / ny, ny]
}

/// One cell of the campaign matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignCell {
    pub record: PerfRecord,
    /// Skipped because there are more cores than elements.
    pub skipped: bool,
    /// L-infinity distance of the final state to the single-threaded run.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CampaignReport {
    pub cells: Vec<CampaignCell>,
}

impl CampaignReport {
    pub fn records(&self) -> Vec<PerfRecord> {
        self.cells.iter().filter(|c| !c.skipped).map(|c| c.record.clone()).collect()
    }

    pub fn speedups(&self) -> Result<Vec<SpeedupRow>, PerfError> {
        speedup_table(&self.records())
    }

    /// Long-format CSV: one row per repeat, one `skipped` row per skipped cell.
    pub fn to_csv(&self) -> Result<String, PerfError> {
        let speedups = self.speedups()?;
        let lookup = |r: &PerfRecord| {
            speedups
                .iter()
                .find(|s| s.case == r.case && s.n_elements == r.n_elements && s.degree == r.degree && s.cores == r.cores)
                .map(|s| s.speedup)
        };
        let mut s = format!("{CAMPAIGN_CSV_VERSION}\n{CAMPAIGN_CSV_HEADER}\n");
        for cell in &self.cells {
            let r = &cell.record;
            let prefix = format!(
                "{},{},{},{},{},{},{}",
                r.case, r.n_elements, r.degree, r.dof_points, r.cores, r.steps, r.rk_stages
            );
            if cell.skipped {
                let _ = writeln!(s, "{prefix},skipped,,,");
                continue;
            }
            let speedup = lookup(r).unwrap_or(f64::NAN);
            for (i, &w) in r.wall_clocks.iter().enumerate() {
                let p = pid(w, r.cores, r.dof_points, r.steps, r.rk_stages);
                let _ = writeln!(s, "{prefix},{i},{w:e},{p:e},{speedup:e}");
            }
        }
        Ok(s)
    }
}

struct CampaignCase {
    op: SpatialOperator,
    initial: ConservativeField,
    mode: crate::solver::BlendingMode,
    dt: f64,
    steps: usize,
}

impl CampaignCase {
    fn new(config: &RunConfig, n_elements: usize) -> Result<Self, SolverError> {
        let mesh = CartesianMesh::new_2d(
            mesh_shape(n_elements),
            config.mesh.lower,
            config.mesh.upper,
            [true, true],
        )?;
        let basis = SpectralBasis::new(config.degree)?;
        let initial = cases::freestream_field(&mesh, &basis, &config.gas);
        let mode = cases::blending_mode(config, n_elements);
        let op = SpatialOperator::new(basis, mesh, config.gas);
        let dt = match config.time.dt {
            Some(dt) => dt,
            None => op.stable_dt(&initial, config.time.cfl),
        };
        let steps = match config.time.stop {
            StopRule::Steps(n) => n,
            StopRule::EndTime(_) => {
                return Err(SolverError::Setup("the scaling campaign needs a step count".into()));
            }
        };
        Ok(Self {
            op,
            initial,
            mode,
            dt,
            steps,
        })
    }

    /// Setup and one warm-up step untimed, then `steps` timed steps.
    fn run(&self) -> Result<(ConservativeField, f64), SolverError> {
        let mut solver = HybridSolver::new(self.op.clone(), self.mode.clone(), self.initial.clone())?;
        solver.step(self.dt)?;
        let t0 = Instant::now();
        for _ in 0..self.steps {
            solver.step(self.dt)?;
        }
        let elapsed = t0.elapsed().as_secs_f64();
        Ok((solver.into_field(), elapsed))
    }
}

/// Freestream strong-scaling campaign over `config.campaign`.
///
/// Cells run one after another; each gets its own pool of `cores` threads.
/// `progress` receives one line per finished cell.
pub fn scaling_campaign<F>(config: &RunConfig, mut progress: F) -> Result<CampaignReport, PerfError>
where
    F: FnMut(&str),
{
    let mut cores_list = config.campaign.cores.clone();
    cores_list.sort_unstable();
    cores_list.dedup();
    let mut report = CampaignReport::default();
    for &n_elements in &config.campaign.elements {
        let case = CampaignCase::new(config, n_elements)?;
        let dof_points = case.initial.dof_points();
        let dof_variables = case.initial.dof_variables();
        let mut reference: Option<ConservativeField> = None;
        for &cores in &cores_list {
            let mut record = PerfRecord {
                case: CaseId::Freestream.name().to_string(),
                n_elements,
                degree: config.degree,
                dof_points,
                dof_variables,
                cores,
                steps: case.steps,
                rk_stages: RK_STAGES,
                wall_clocks: Vec::new(),
            };
            if cores > n_elements {
                progress(&format!("{n_elements} elements, {cores} cores: skipped (more cores than elements)"));
                report.cells.push(CampaignCell {
                    record,
                    skipped: true,
                    max_deviation: 0.0,
                });
                continue;
            }
            if reference.is_none() {
                let serial = cases::thread_pool(Some(1))?;
                reference = Some(serial.install(|| case.run())?.0);
            }
            let pool = cases::thread_pool(Some(cores))?;
            let mut max_deviation: f64 = 0.0;
            for _ in 0..config.repeats {
                let (field, elapsed) = pool.install(|| case.run())?;
                record.wall_clocks.push(elapsed);
                max_deviation = max_deviation.max(field.max_abs_diff(reference.as_ref().expect("reference run")));
            }
            progress(&format!(
                "{n_elements} elements, {cores} cores: mean {:.4e} s, PID {:.4e} s, deviation from serial {max_deviation:e}",
                record.mean_wall_clock(),
                compute_pid(&record)?
            ));
            report.cells.push(CampaignCell {
                record,
                skipped: false,
                max_deviation,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(wall: f64, cores: usize) -> PerfRecord {
        PerfRecord {
            case: "freestream".into(),
            n_elements: 64,
            degree: 7,
            dof_points: 1_000_000,
            dof_variables: 4_000_000,
            cores,
            steps: 100,
            rk_stages: 5,
            wall_clocks: vec![wall],
        }
    }

    #[test]
    fn pid_of_reference_record() {
        assert_eq!(compute_pid(&record(1.0, 1)).unwrap(), 2e-9);
        assert_eq!(compute_pid(&record(1.0, 2)).unwrap(), 4e-9);
    }

    #[test]
    fn invalid_records_are_rejected() {
        let mut r = record(1.0, 1);
        r.steps = 0;
        r.cores = 0;
        match compute_pid(&r) {
            Err(PerfError::Validation(p)) => assert_eq!(p.len(), 2),
            other => panic!("{other:?}"),
        }
        assert!(compute_pid(&record(-1.0, 1)).is_err());
        assert!(compute_pid(&record(0.0, 1)).is_err());
    }

    #[test]
    fn speedup_against_smallest_core_count() {
        let rows = speedup_table(&[record(25.0, 4), record(100.0, 1)]).unwrap();
        assert_eq!(rows[0].cores, 1);
        assert_eq!(rows[0].speedup, 1.0);
        assert_eq!(rows[1].speedup, 4.0);
        assert_eq!(rows[1].ideal, 4.0);
        let single = speedup_table(&[record(3.0, 2)]).unwrap();
        assert_eq!(single[0].speedup, 1.0);
    }

    #[test]
    fn repeats_use_mean_with_extremes() {
        let mut r = record(0.0, 1);
        r.wall_clocks = vec![1.0, 1.0, 1.0, 1.0, 6.0];
        let rows = speedup_table(&[r]).unwrap();
        assert_eq!(rows[0].mean_wall_clock, 2.0);
        assert_eq!(rows[0].min_wall_clock, 1.0);
        assert_eq!(rows[0].max_wall_clock, 6.0);
    }

    #[test]
    fn inconsistent_groups_list_every_mismatch() {
        let mut b = record(1.0, 2);
        b.steps = 50;
        b.dof_points = 7;
        match speedup_table(&[record(1.0, 1), b]) {
            Err(PerfError::Validation(p)) => {
                assert_eq!(p.len(), 2, "{p:?}");
                assert!(p.iter().any(|m| m.contains("steps")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mesh_shapes() {
        assert_eq!(mesh_shape(64), [8, 8]);
        assert_eq!(mesh_shape(128), [16, 8]);
        assert_eq!(mesh_shape(12), [4, 3]);
        assert_eq!(mesh_shape(7), [7, 1]);
    }

    #[test]
    fn small_campaign_csv() {
        let mut c = RunConfig::defaults(CaseId::Scaling);
        c.degree = 2;
        c.campaign.elements = vec![2, 8];
        c.campaign.cores = vec![1, 4];
        c.time.stop = StopRule::Steps(2);
        c.repeats = 2;
        let report = scaling_campaign(&c, |_| {}).unwrap();
        assert_eq!(report.cells.len(), 4);
        assert!(report.cells[1].skipped);
        for cell in &report.cells {
            assert!(cell.max_deviation <= 1e-12);
        }
        let csv = report.to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], CAMPAIGN_CSV_VERSION);
        assert_eq!(lines[1], CAMPAIGN_CSV_HEADER);
        // three cells with two repeats each, one skip row
        assert_eq!(lines.len(), 2 + 7);
        assert!(lines[4].starts_with("freestream,2,2,18,4,2,5,skipped"));
    }

    proptest! {
        #[test]
        fn pid_scale_covariance(wall in 1e-3f64..1e3, k in 2usize..16, cores in 1usize..64, dof in 1usize..1_000_000) {
            let base = pid(wall, cores, dof, 100, 5);
            let kf = k as f64;
            let scaled_wall = pid(wall * kf, cores, dof, 100, 5);
            prop_assert!((scaled_wall - kf * base).abs() <= 1e-14 * kf * base);
            let scaled_dof = pid(wall, cores, dof * k, 100, 5);
            prop_assert!((scaled_dof - base / kf).abs() <= 1e-14 * base / kf);
        }
    }
}
