use std::process::ExitCode;

use ccs_playground::acceptance;

fn main() -> ExitCode {
    let results = acceptance::run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
