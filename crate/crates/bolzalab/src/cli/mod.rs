//! Command-line front door.

use std::ffi::OsString;

/// Entry point used by the `bolzalab` binary. Returns the process exit code.
pub fn cli_run<I, T>(_argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    eprintln!("cli not wired up yet");
    1
}
