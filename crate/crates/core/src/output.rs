//! CSV tables written by the command line tool.
//!
//! Every row starts with a `schema` column naming the table layout and its
//! version. Angles are degrees, powers dBm, rates bits per channel use.

use std::io::Write;

use serde::Serialize;

use crate::montecarlo::{BoresightScan, SweepRow};

pub const SWEEP_SCHEMA: &str = "uavnoma.sweep.v1";
pub const COVERAGE_SCHEMA: &str = "uavnoma.coverage.v1";
pub const SCAN_SCHEMA: &str = "uavnoma.scan.v1";

#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub schema: &'static str,
    pub h_m: f64,
    pub ptx_dbm: f64,
    pub scanning: u8,
    pub phi_r_deg: f64,
    pub coverage_pct: f64,
    pub d_star_m: f64,
    pub noma_rate_bpcu: f64,
    pub noma_rate_se: f64,
    pub oma_rate_bpcu: f64,
    pub oma_rate_se: f64,
    pub p_out_noma_i: f64,
    pub p_out_noma_i_se: f64,
    pub p_out_noma_j: f64,
    pub p_out_noma_j_se: f64,
    pub p_out_oma_i: f64,
    pub p_out_oma_i_se: f64,
    pub p_out_oma_j: f64,
    pub p_out_oma_j_se: f64,
    pub drops: u64,
}

impl SweepRecord {
    pub fn new(row: &SweepRow, ptx_dbm: f64) -> Self {
        let e = &row.estimate;
        Self {
            schema: SWEEP_SCHEMA,
            h_m: row.altitude,
            ptx_dbm,
            scanning: u8::from(row.scanning),
            phi_r_deg: row.required_angle.to_degrees(),
            coverage_pct: 100.0 * row.coverage,
            d_star_m: row.d_star,
            noma_rate_bpcu: e.noma_rate.mean,
            noma_rate_se: e.noma_rate.se,
            oma_rate_bpcu: e.oma_rate.mean,
            oma_rate_se: e.oma_rate.se,
            p_out_noma_i: e.noma_outage_i.mean,
            p_out_noma_i_se: e.noma_outage_i.se,
            p_out_noma_j: e.noma_outage_j.mean,
            p_out_noma_j_se: e.noma_outage_j.se,
            p_out_oma_i: e.oma_outage_i.mean,
            p_out_oma_i_se: e.oma_outage_i.se,
            p_out_oma_j: e.oma_outage_j.mean,
            p_out_oma_j_se: e.oma_outage_j.se,
            drops: e.drops,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageRecord {
    pub schema: &'static str,
    pub h_m: f64,
    pub phi_r_deg: f64,
    pub phi_e_deg: f64,
    pub scanning: u8,
    pub coverage_pct: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub schema: &'static str,
    pub h_m: f64,
    pub d_m: f64,
    pub noma_rate_bpcu: f64,
    pub noma_rate_se: f64,
    pub oma_rate_bpcu: f64,
    pub oma_rate_se: f64,
    pub is_d_star: u8,
}

impl ScanRecord {
    pub fn from_scan(scan: &BoresightScan) -> Vec<Self> {
        scan.points
            .iter()
            .enumerate()
            .map(|(k, (d, e))| Self {
                schema: SCAN_SCHEMA,
                h_m: scan.altitude,
                d_m: *d,
                noma_rate_bpcu: e.noma_rate.mean,
                noma_rate_se: e.noma_rate.se,
                oma_rate_bpcu: e.oma_rate.mean,
                oma_rate_se: e.oma_rate.se,
                is_d_star: u8::from(k == scan.best),
            })
            .collect()
    }
}

pub fn write_records<W: Write, T: Serialize>(writer: W, records: &[T]) -> csv::Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    for r in records {
        csv.serialize(r)?;
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::{Estimate, Metric};

    fn estimate() -> Estimate {
        let m = Metric { mean: 0.25, se: 0.01 };
        Estimate {
            drops: 10,
            noma_rate: Metric { mean: 6.0, se: 0.1 },
            oma_rate: Metric { mean: 3.0, se: 0.2 },
            noma_outage_i: m,
            noma_outage_j: m,
            oma_outage_i: m,
            oma_outage_j: m,
        }
    }

    #[test]
    fn sweep_header_and_units() {
        let row = SweepRow {
            altitude: 50.0,
            scanning: true,
            required_angle: std::f64::consts::FRAC_PI_4,
            coverage: 0.5,
            d_star: 48.0,
            estimate: estimate(),
        };
        let mut buf = Vec::new();
        write_records(&mut buf, &[SweepRecord::new(&row, 20.0)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "schema,h_m,ptx_dbm,scanning,phi_r_deg,coverage_pct,d_star_m,noma_rate_bpcu,noma_rate_se,\
             oma_rate_bpcu,oma_rate_se,p_out_noma_i,p_out_noma_i_se,p_out_noma_j,p_out_noma_j_se,\
             p_out_oma_i,p_out_oma_i_se,p_out_oma_j,p_out_oma_j_se,drops"
        );
        assert_eq!(
            lines.next().unwrap(),
            "uavnoma.sweep.v1,50.0,20.0,1,45.0,50.0,48.0,6.0,0.1,3.0,0.2,0.25,0.01,0.25,0.01,0.25,0.01,0.25,0.01,10"
        );
    }
}
