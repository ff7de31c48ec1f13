//! Run a scenario from text and print its report.

use dynalg::cli::{run_config_text, Overrides};

const SCENARIO: &str = "
[scenario]
id = demo
kind = causal
battery = false

[functionals]
F1 = gaussian(v=0.2, c=[0.0], w=1.0) * bump(center=0.9, halfwidth=0.4)
F2 = sech2(v=-0.15, c=[0.3], w=1.2) * bump(center=-0.9, halfwidth=0.4)
F3 = bump(center=0.0, halfwidth=0.8, amplitude=0.3)
";

fn main() -> dynalg::Result<()> {
    let report = run_config_text(SCENARIO, &Overrides::default())?;
    print!("{}", report.table(false));
    print!("{}", report.to_tsv(false));
    Ok(())
}
