use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use wirecalc::{execute, Opts, Outcome};

fn main() -> ExitCode {
    let opts = Opts::parse();
    let source = match &opts.file {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some((t, p.display().to_string())),
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
        None => None,
    };
    // Panics are invariant violations, not user errors.
    std::panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    let result = std::panic::catch_unwind(|| execute(&opts, source.as_ref().map(|(t, o)| (t.as_str(), o.as_str()))));
    let Outcome { stdout, stderr, code } = match result {
        Ok(o) => o,
        Err(_) => return ExitCode::from(2),
    };
    print!("{stdout}");
    let _ = std::io::stdout().flush();
    eprint!("{stderr}");
    ExitCode::from(code as u8)
}
