//! A full run with the 6-tuple convention, written out as JSON and CSV, then
//! one desk-scale table row scored against its oracle.

use anyhow::Result;
use blockmilp::alm::AlmVariant;
use blockmilp::instances::gen_sslp;
use blockmilp::report::{run, RunConfig, RunReport};
use blockmilp::subsolver::BranchAndBound;
use blockmilp::tables::{case_oracle, cases, run_case, Scale, TableId, TableRow, SSLP_TUPLE};

fn main() -> Result<()> {
    let p = gen_sslp(3, 5, 3, 1, 1.0)?;
    let cfg = RunConfig::alm(AlmVariant::Practical).with_tuple(SSLP_TUPLE)?;
    let report = run(&p, "sslp-3x5x3-seed1", &cfg, &BranchAndBound)?;
    let json = report.to_json()?;
    println!("{}", &json[..json.find("\"history\"").unwrap_or(json.len())]);
    println!("{}\n{}", RunReport::csv_header(), report.csv_row());

    let case = cases(TableId::Random, Scale::Desk).remove(0);
    let oracle = case_oracle(&case)?;
    println!("\n{}", TableRow::CSV_HEADER);
    for (row, _) in run_case(&case, &BranchAndBound, 1, oracle)? {
        println!("{}", row.csv_row());
    }
    Ok(())
}
