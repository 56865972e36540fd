use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde_json::Value;

use super::HarnessError;

/// A long-lived `runner.py serve` process.
pub(crate) struct Server {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl Server {
    fn spawn(python: &str, runner: &Path, env: &[(String, String)]) -> Result<Self, HarnessError> {
        let mut child = Command::new(python)
            .arg("-u")
            .arg(runner)
            .arg("serve")
            .env_clear()
            .envs(env.iter().map(|(k, v)| (k, v)))
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::NotFound => HarnessError::CommandNotFound(python.to_string()),
                _ => HarnessError::Io(e),
            })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut server = Server { child, stdin, stdout };
        let ready = server.read()?;
        if ready.get("ready") != Some(&Value::Bool(true)) {
            return Err(HarnessError::Runner(format!("server did not start: {ready}")));
        }
        Ok(server)
    }

    fn read(&mut self) -> Result<Value, HarnessError> {
        let mut line = String::new();
        if self.stdout.read_line(&mut line)? == 0 {
            return Err(HarnessError::Runner("test server exited".into()));
        }
        serde_json::from_str(&line).map_err(|e| HarnessError::Runner(format!("bad server reply: {e}")))
    }

    pub fn request(&mut self, req: &Value) -> Result<Value, HarnessError> {
        writeln!(self.stdin, "{req}")?;
        self.stdin.flush()?;
        self.read()
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Idle servers, handed out one per concurrent session.
pub(crate) struct ServerPool {
    idle: Mutex<Vec<Server>>,
}

impl ServerPool {
    pub fn new() -> Self {
        Self {
            idle: Mutex::new(Vec::new()),
        }
    }

    pub fn with<T>(
        &self,
        python: &str,
        runner: &Path,
        env: &[(String, String)],
        f: impl FnOnce(&mut Server) -> Result<T, HarnessError>,
    ) -> Result<T, HarnessError> {
        let taken = self.idle.lock().unwrap().pop();
        let mut server = match taken {
            Some(s) => s,
            None => Server::spawn(python, runner, env)?,
        };
        let out = f(&mut server);
        // A server that failed mid-request is dropped rather than reused.
        if !matches!(out, Err(HarnessError::Runner(_)) | Err(HarnessError::Io(_))) {
            self.idle.lock().unwrap().push(server);
        }
        out
    }
}
