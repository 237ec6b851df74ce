//! CSV renderings of solver state, step diagnostics and wall-model sweeps.
//!
//! Every file starts with a `# dgfv <kind> v<version>` comment line followed by
//! the column header. Floats use Rust's shortest round-trip exponent form.

use std::fmt::Write;

use crate::cases::SweepRow;
use crate::field::{node_position, ConservativeField};
use crate::operator::SpatialOperator;
use crate::solver::StepDiagnostics;

pub const STATE_CSV_HEADER: &str = "element,node,x,y,rho,rhou,rhov,E,alpha";
pub const DIAGNOSTICS_CSV_HEADER: &str = "step,time,dt,mass,mom_x,mom_y,energy,max_alpha,active_elements";
pub const SWEEP_CSV_HEADER: &str = "y_plus,u_plus_spalding,u_plus_van_driest,u_plus_edge";

/// One row per node; `y` is 0 in one dimension.
pub fn state_csv(op: &SpatialOperator, field: &ConservativeField, alpha: &[f64], meta: &str) -> String {
    let mut s = format!("# dgfv state v1 {meta}\n{STATE_CSV_HEADER}\n");
    let mesh = op.mesh();
    let basis = op.basis();
    let one_d = mesh.dims() == 1;
    for e in 0..field.n_elements() {
        for (k, u) in field.element(e).iter().enumerate() {
            let [x, y] = node_position(mesh, basis, e, k);
            let y = if one_d { 0.0 } else { y };
            let _ = writeln!(
                s,
                "{e},{k},{x:e},{y:e},{:e},{:e},{:e},{:e},{:e}",
                u[0], u[1], u[2], u[3], alpha[e]
            );
        }
    }
    s
}

pub fn diagnostics_csv(rows: &[StepDiagnostics], meta: &str) -> String {
    let mut s = format!("# dgfv diagnostics v1 {meta}\n{DIAGNOSTICS_CSV_HEADER}\n");
    for d in rows {
        let t = d.totals;
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            d.step, d.time, d.dt, t[0], t[1], t[2], t[3], d.max_alpha, d.active_elements
        );
    }
    s
}

/// The edge column is empty where the transform is undefined.
pub fn sweep_csv(rows: &[SweepRow], meta: &str) -> String {
    let mut s = format!("# dgfv wall-sweep v1 {meta}\n{SWEEP_CSV_HEADER}\n");
    for r in rows {
        let edge = r.u_plus_edge.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(s, "{:e},{:e},{:e},{edge}", r.y_plus, r.u_plus, r.u_plus_van_driest);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::SpectralBasis;
    use crate::mesh::CartesianMesh;
    use crate::physics::Gas;

    #[test]
    fn state_rows_round_trip() {
        let mesh = CartesianMesh::new_1d(2, 0.0, 1.0, true).unwrap();
        let basis = SpectralBasis::new(1).unwrap();
        let gas = Gas::default();
        let field = ConservativeField::from_fn(&mesh, &basis, |x| gas.conserved(1.0 + x[0] / 3.0, [0.1, 0.0], 1.0));
        let op = SpatialOperator::new(basis, mesh, gas);
        let csv = state_csv(&op, &field, &[0.0, 0.25], "case=test");
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "# dgfv state v1 case=test");
        assert_eq!(lines[1], STATE_CSV_HEADER);
        assert_eq!(lines.len(), 2 + 4);
        let cols: Vec<&str> = lines[5].split(',').collect();
        assert_eq!(cols[0], "1");
        assert_eq!(cols[1].parse::<usize>().unwrap(), 1);
        assert_eq!(cols[4].parse::<f64>().unwrap(), field.element(1)[1][0]);
        assert_eq!(cols[8].parse::<f64>().unwrap(), 0.25);
    }
}
