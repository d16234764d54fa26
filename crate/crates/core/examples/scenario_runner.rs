//! Runs a scenario file, or every bundled scenario, into a temporary output
//! root and prints the verdict summary of each.

use std::path::PathBuf;

use wassflow::scenario::{run_to_dir, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let files: Vec<PathBuf> = match std::env::args().nth(1) {
        Some(f) => vec![f.into()],
        None => {
            let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
            let mut v: Vec<_> = std::fs::read_dir(dir)?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            v.sort();
            v
        }
    };
    let out = std::env::temp_dir().join("wassflow-examples");
    for f in files {
        let text = std::fs::read_to_string(&f)?;
        let s = Scenario::from_json(&text)?;
        let a = run_to_dir(&s, &text, &out, false)?;
        println!(
            "{:<22} exit {}  {} passed, {} failed",
            s.name, a.exit_code, a.summary.passed, a.summary.failed
        );
        for v in &a.verdicts {
            println!("    {:<36} {:?}", v.name, v.verdict);
        }
    }
    Ok(())
}
