//! Subprocess invocation with a wall-clock deadline.
//!
//! Each command runs in its own process group so a timeout can kill the
//! whole tree (a build tool plus the JVM it forked, say).

use std::fs::File;
use std::io::{self, Read, Seek, SeekFrom};
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

/// Output kept from a command, from the end.
const OUTPUT_TAIL_BYTES: u64 = 16 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exit {
    Code(i32),
    Signal(i32),
    TimedOut,
}

impl Exit {
    pub fn success(&self) -> bool {
        *self == Exit::Code(0)
    }
}

#[derive(Debug, Clone)]
pub struct CommandResult {
    pub exit: Exit,
    pub elapsed: Duration,
    /// Tail of interleaved stdout and stderr.
    pub output: String,
}

pub struct Invocation<'a> {
    pub argv: &'a [String],
    pub cwd: &'a Path,
    pub env: &'a [(String, String)],
    pub timeout: Option<Duration>,
}

fn kill_group(pid: u32) {
    // SAFETY: plain syscall; a stale pid at worst yields ESRCH.
    unsafe {
        libc::kill(-(pid as libc::pid_t), libc::SIGKILL);
    }
}

pub fn run_command(inv: &Invocation<'_>) -> io::Result<CommandResult> {
    let (program, args) =
        inv.argv.split_first().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "empty command"))?;
    let mut log = tempfile::tempfile()?;
    let mut cmd = Command::new(program);
    cmd.args(args)
        .current_dir(inv.cwd)
        .stdin(Stdio::null())
        .stdout(log.try_clone()?)
        .stderr(log.try_clone()?)
        .process_group(0);
    for (k, v) in inv.env {
        cmd.env(k, v);
    }
    let start = Instant::now();
    let mut child = cmd.spawn()?;
    let pid = child.id();
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            // Reap stragglers left in the group by a finished leader.
            kill_group(pid);
            break match (status.code(), status.signal()) {
                (Some(c), _) => Exit::Code(c),
                (None, Some(s)) => Exit::Signal(s),
                (None, None) => Exit::Code(-1),
            };
        }
        if inv.timeout.is_some_and(|t| start.elapsed() >= t) {
            kill_group(pid);
            let _ = child.wait();
            break Exit::TimedOut;
        }
        let waited = start.elapsed();
        thread::sleep(if waited < Duration::from_millis(100) {
            Duration::from_millis(2)
        } else {
            Duration::from_millis(15)
        });
    };
    let elapsed = start.elapsed();
    Ok(CommandResult { exit, elapsed, output: read_tail(&mut log)? })
}

fn read_tail(f: &mut File) -> io::Result<String> {
    let len = f.seek(SeekFrom::End(0))?;
    f.seek(SeekFrom::Start(len.saturating_sub(OUTPUT_TAIL_BYTES)))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh(script: &str, timeout: Option<Duration>) -> CommandResult {
        let argv = vec!["sh".to_string(), "-c".to_string(), script.to_string()];
        let dir = std::env::temp_dir();
        let env = vec![("MUTANT_ID".to_string(), "abc".to_string())];
        run_command(&Invocation { argv: &argv, cwd: &dir, env: &env, timeout }).unwrap()
    }

    #[test]
    fn captures_exit_code_and_output() {
        let r = sh("echo out; echo err >&2; echo $MUTANT_ID; exit 3", None);
        assert_eq!(r.exit, Exit::Code(3));
        assert!(r.output.contains("out") && r.output.contains("err") && r.output.contains("abc"));
    }

    #[test]
    fn timeout_kills_process_tree() {
        let start = Instant::now();
        let r = sh("sleep 30 & sleep 30; echo never", Some(Duration::from_millis(200)));
        assert_eq!(r.exit, Exit::TimedOut);
        assert!(start.elapsed() < Duration::from_secs(5));
        assert!(!r.output.contains("never"));
    }

    #[test]
    fn empty_argv_is_rejected() {
        let dir = std::env::temp_dir();
        let err = run_command(&Invocation { argv: &[], cwd: &dir, env: &[], timeout: None }).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::InvalidInput);
    }
}
