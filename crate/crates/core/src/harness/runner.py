"""Pytest driver for the repair harness.

Two entry points:

    runner.py run --root DIR --results FILE [--coverage] [--test-timeout S] [TEST_ID ...]
    runner.py serve

`run` executes one pytest session and writes JSON lines to the results file.
`serve` imports pytest once, then answers one JSON request per stdin line,
forking a child per test session so every session starts from the same
interpreter state.
"""

import json
import os
import signal
import sys
import threading
import time

import pytest


class TestTimeout(BaseException):
    """Raised into a test that ran past its limit."""


class Recorder:
    def __init__(self, results_path, root, coverage, test_timeout=0.0):
        self.out = open(results_path, "w", encoding="utf-8")
        self.root = os.path.realpath(root) + os.sep
        self.coverage = coverage
        self.keep = {}
        self.lines = None
        self.reports = {}
        self.started = {}
        self.test_timeout = test_timeout
        self.expired = None

    def emit(self, **event):
        self.out.write(json.dumps(event) + "\n")
        self.out.flush()

    def rel(self, filename):
        hit = self.keep.get(filename)
        if hit is None:
            real = os.path.realpath(filename)
            inside = real.startswith(self.root) and os.path.isfile(real)
            hit = real[len(self.root):] if inside else False
            self.keep[filename] = hit
        return hit

    def trace(self, frame, event, arg):
        rel = self.rel(frame.f_code.co_filename)
        if not rel:
            return None
        lines = self.lines.setdefault(rel, set())
        lines.add(frame.f_lineno)

        def local(frame, event, arg):
            if event == "line":
                lines.add(frame.f_lineno)
            return local

        return local

    def pytest_collectreport(self, report):
        if report.failed:
            self.emit(event="collect_error", nodeid=report.nodeid, trace=report.longreprtext)

    def pytest_collection_finish(self, session):
        self.emit(event="collected", tests=[item.nodeid for item in session.items])

    def pytest_runtest_logstart(self, nodeid, location):
        self.emit(event="start", test_id=nodeid)
        self.reports[nodeid] = []
        self.started[nodeid] = time.perf_counter()
        if self.test_timeout > 0:
            self.expired = None

            def on_alarm(signum, frame):
                self.expired = nodeid
                raise TestTimeout("test exceeded its %.1f s limit" % self.test_timeout)

            signal.signal(signal.SIGALRM, on_alarm)
            signal.setitimer(signal.ITIMER_REAL, self.test_timeout)
        if self.coverage:
            self.lines = {}
            threading.settrace(self.trace)
            sys.settrace(self.trace)

    def pytest_runtest_logreport(self, report):
        self.reports.setdefault(report.nodeid, []).append(report)

    def pytest_runtest_logfinish(self, nodeid, location):
        if self.test_timeout > 0:
            signal.setitimer(signal.ITIMER_REAL, 0)
        if self.coverage:
            sys.settrace(None)
            threading.settrace(None)
        reports = self.reports.pop(nodeid, [])
        outcome = "pass"
        trace = ""
        for rep in reports:
            if rep.failed:
                outcome = "fail" if rep.when == "call" else "error"
                trace = rep.longreprtext
                if self.expired == nodeid:
                    outcome = "timeout"
                break
            if rep.skipped and outcome == "pass":
                outcome = "skipped"
        event = {
            "event": "end",
            "test_id": nodeid,
            "outcome": outcome,
            "duration": time.perf_counter() - self.started.pop(nodeid, time.perf_counter()),
            "raw_trace": trace,
        }
        if self.coverage:
            event["executed_lines"] = {k: sorted(v) for k, v in (self.lines or {}).items()}
            self.lines = None
        self.emit(**event)


def pytest_args(root, tests):
    args = ["-q", "-p", "no:cacheprovider", "--tb=long", "-l", "--rootdir", root]
    return args + (list(tests) if tests else [root])


def session(root, results, coverage, tests, test_timeout=0.0):
    os.chdir(root)
    if root not in sys.path:
        sys.path.insert(0, root)
    recorder = Recorder(results, root, coverage, test_timeout)
    code = pytest.main(pytest_args(root, tests), plugins=[recorder])
    recorder.out.close()
    return int(code)


def check(source):
    try:
        compile(source, "<candidate>", "exec", dont_inherit=True)
    except SyntaxError as exc:
        return {"ok": False, "line": exc.lineno, "message": str(exc.msg)}
    except ValueError as exc:
        return {"ok": False, "line": None, "message": str(exc)}
    return {"ok": True}


def forked_session(req):
    started = time.perf_counter()
    pid = os.fork()
    if pid == 0:
        code = 70
        try:
            os.setsid()
            log = os.open(req["log"], os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o644)
            os.dup2(log, 1)
            os.dup2(log, 2)
            code = session(req["workdir"], req["results"], req["coverage"], req["tests"], float(req.get("test_timeout", 0)))
        finally:
            os._exit(code)
    deadline = started + float(req["timeout"])
    while True:
        done, status = os.waitpid(pid, os.WNOHANG)
        if done:
            code = os.waitstatus_to_exitcode(status)
            return {"status": "done", "exit": code, "elapsed": time.perf_counter() - started}
        if time.perf_counter() >= deadline:
            for target in (-pid, pid):
                try:
                    os.kill(target, signal.SIGKILL)
                except OSError:
                    pass
            os.waitpid(pid, 0)
            return {"status": "timeout", "exit": None, "elapsed": time.perf_counter() - started}
        time.sleep(0.002)


def warm_up():
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        saved = os.dup(1), os.dup(2)
        null = os.open(os.devnull, os.O_WRONLY)
        os.dup2(null, 1)
        os.dup2(null, 2)
        try:
            pytest.main(["-q", "-p", "no:cacheprovider", "--collect-only", tmp])
        finally:
            os.dup2(saved[0], 1)
            os.dup2(saved[1], 2)
            os.close(null)


def serve():
    warm_up()
    out = sys.stdout
    out.write(json.dumps({"ready": True}) + "\n")
    out.flush()
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        op = req.get("op")
        if op == "run":
            reply = forked_session(req)
        elif op == "check":
            reply = check(req["source"])
        else:
            reply = {"error": "unknown op %r" % op}
        out.write(json.dumps(reply) + "\n")
        out.flush()


def main(argv):
    if argv[:1] == ["serve"]:
        serve()
        return 0
    if argv[:1] != ["run"]:
        sys.stderr.write(__doc__)
        return 2
    argv = argv[1:]
    root = results = None
    coverage = False
    test_timeout = 0.0
    tests = []
    while argv:
        arg = argv.pop(0)
        if arg == "--root":
            root = argv.pop(0)
        elif arg == "--results":
            results = argv.pop(0)
        elif arg == "--coverage":
            coverage = True
        elif arg == "--test-timeout":
            test_timeout = float(argv.pop(0))
        else:
            tests.append(arg)
    return session(os.path.realpath(root), results, coverage, tests, test_timeout)


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
