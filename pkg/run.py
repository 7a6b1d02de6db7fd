#!/usr/bin/env python3
"""
GCPC Lab Build Script

Cross-platform setup and test automation for the goal-conditioned predictive
coding lab. Works on Windows, macOS, and Linux.

Usage:
    python3 run.py help
    python3 run.py setup
    python3 run.py check
    python3 run.py test-numeric
    python3 run.py test-trajnet
    python3 run.py test-all
    python3 run.py test-acceptance
    python3 run.py clean

The pipeline itself is run with:
    python3 -m src.cli gen-data --env minimaze --layout corridor-S --n 200 --seed 7 --out data/corridor
"""

import argparse
import os
import platform
import shutil
import subprocess
import sys
from pathlib import Path

from src.console import Colors

# suite name -> (test module, per-test timeout in seconds, description)
SUITES = {
    "numeric": ("tests/test_numeric.py", 60, "autodiff tensor, ops, RNG, Adam, gradient checks"),
    "nn": ("tests/test_nn.py", 60, "linear, layer norm, attention, transformer blocks"),
    "data": ("tests/test_data.py", 30, "dataset I/O, normalization, windows, goals, masking"),
    "trajnet": ("tests/test_trajnet.py", 120, "TrajNet model, losses, training, checkpoints"),
    "policy": ("tests/test_policy.py", 120, "policy network, conditioning, training, checkpoints"),
    "envs": ("tests/test_envs.py", 60, "MiniMaze, LineRun, planners, collectors"),
    "eval": ("tests/test_eval.py", 120, "rollouts, scoring, best-of-last-five, aggregation"),
    "cli": ("tests/test_cli.py", 300, "command-line pipeline end to end"),
}
ACCEPTANCE = ("tests/test_acceptance.py", 1800, "long directional acceptance criteria")


class GCPCBuilder:
    """Setup, test and clean targets for the lab."""

    def __init__(self):
        self.root_dir = Path(__file__).parent.absolute()
        self.report_dir = self.root_dir / "reports"
        self.venv_dir = self.root_dir / "venv"
        self.python_version = "3.12"
        self.colors = Colors(sys.stdout)

        if platform.system() == "Windows":
            self.venv_python3 = self.venv_dir / "Scripts" / "python.exe"
            self.venv_pip = self.venv_dir / "Scripts" / "pip.exe"
        else:
            self.venv_python3 = self.venv_dir / "bin" / "python"
            self.venv_pip = self.venv_dir / "bin" / "pip"

    def run_command(self, cmd, cwd=None, check=True, capture_output=False, env=None):
        """Run a command given as an argument list."""
        try:
            return subprocess.run(
                cmd,
                cwd=cwd or self.root_dir,
                check=check,
                capture_output=capture_output,
                text=True,
                env=env,
            )
        except subprocess.CalledProcessError as e:
            if not capture_output:
                print(self.colors.red(f"Command failed: {e}"))
            if check:
                sys.exit(1)
            return e

    def find_python(self):
        """Find a Python executable of the required version."""
        for cmd in [f"python{self.python_version}", "python3", "python"]:
            try:
                result = self.run_command([cmd, "--version"], capture_output=True, check=False)
            except OSError:
                continue
            if result.returncode == 0 and self.python_version in result.stdout:
                return cmd
        return None

    def python(self):
        """The venv interpreter when set up, else the current one."""
        return str(self.venv_python3) if self.venv_python3.exists() else sys.executable

    def show_help(self):
        """Show help information."""
        print(self.colors.blue("GCPC Lab - Available Commands:"))
        print()
        print(self.colors.green("Setup:"))
        print(self.colors.yellow("  python3 run.py setup           - Create the venv and install requirements.txt"))
        print(self.colors.yellow("  python3 run.py check           - Check the Python version and installed packages"))
        print()
        print(self.colors.green("Testing:"))
        for name, (_, _, description) in SUITES.items():
            print(self.colors.yellow(f"  python3 run.py test-{name:<15} - {description}"))
        print(self.colors.yellow("  python3 run.py test-all        - Every suite above"))
        print(self.colors.yellow(f"  python3 run.py test-acceptance - {ACCEPTANCE[2]} (GCPC_ACCEPTANCE=1)"))
        print()
        print(self.colors.green("Cleaning:"))
        print(self.colors.yellow("  python3 run.py clean           - Clean caches and reports"))
        print(self.colors.yellow("  python3 run.py clean-cache     - Clean Python cache files"))
        print(self.colors.yellow("  python3 run.py clean-reports   - Clean test reports directory"))
        print(self.colors.yellow("  python3 run.py clean-venv      - Remove virtual environment"))
        print()
        print(self.colors.green("Environment:"))
        print(f"  Virtual environment: {self.venv_dir}")
        print(f"  Python version required: {self.python_version}")
        print("  GCPC_THREADS     evaluation worker threads (default 1)")
        print("  GCPC_LOG_LEVEL   pipeline log level (default INFO)")
        print()
        print(self.colors.blue("Quick start: python3 run.py setup && python3 run.py test-all"))

    def check_dependencies(self):
        """Check the interpreter and the packages listed in requirements.txt."""
        print(self.colors.blue("Checking required dependencies..."))
        print()
        python_cmd = self.find_python()
        if python_cmd:
            print(self.colors.green(f"✓ Python {self.python_version} found: {python_cmd}"))
        else:
            print(self.colors.red(f"✗ Python {self.python_version} is not installed or not found"))
            print(self.colors.yellow("    - Download from https://www.python.org/downloads/"))

        packages_ok = True
        for module in ["numpy", "matplotlib", "tqdm", "pytest", "pytest_html", "pytest_timeout"]:
            result = self.run_command([self.python(), "-c", f"import {module}"], capture_output=True, check=False)
            if result.returncode == 0:
                print(self.colors.green(f"✓ {module}"))
            else:
                print(self.colors.red(f"✗ {module} (run 'python3 run.py setup')"))
                packages_ok = False
        print()
        print(self.colors.blue("Dependency check completed."))
        return bool(python_cmd) and packages_ok

    def setup_environment(self):
        """Create the virtual environment and install requirements."""
        print(self.colors.blue("Setting up project environment..."))
        python_cmd = self.find_python() or sys.executable

        print(self.colors.yellow("Creating virtual environment..."))
        if not self.venv_dir.exists():
            self.run_command([python_cmd, "-m", "venv", str(self.venv_dir)])
            print(self.colors.green(f"Virtual environment created at {self.venv_dir}"))
        else:
            print(self.colors.blue(f"Virtual environment already exists at {self.venv_dir}"))

        print(self.colors.yellow("Upgrading pip in virtual environment..."))
        self.run_command([str(self.venv_pip), "install", "--upgrade", "pip"])
        print(self.colors.yellow("Installing Python dependencies in virtual environment..."))
        self.run_command([str(self.venv_pip), "install", "-r", "requirements.txt"])
        print(self.colors.green(f"Setup completed! Virtual environment is ready at {self.venv_dir}"))
        if platform.system() == "Windows":
            print(self.colors.blue(f"  {self.venv_dir}\\Scripts\\Activate.ps1"))
        else:
            print(self.colors.blue(f"  source {self.venv_dir}/bin/activate"))

    def clean_cache(self):
        """Clean Python cache files."""
        print(self.colors.yellow("Cleaning Python cache files..."))
        for pattern in ["**/__pycache__", "**/*.pyc", "**/.pytest_cache"]:
            for path in self.root_dir.glob(pattern):
                if path.is_dir():
                    shutil.rmtree(path, ignore_errors=True)
                else:
                    path.unlink(missing_ok=True)
        print(self.colors.green("Python cache files cleaned."))

    def clean_reports(self):
        """Clean reports directory."""
        print(self.colors.yellow("Cleaning reports directory..."))
        if self.report_dir.exists():
            shutil.rmtree(self.report_dir)
        print(self.colors.green("Reports directory cleaned."))

    def clean_venv(self):
        """Clean virtual environment."""
        print(self.colors.yellow("Cleaning virtual environment..."))
        if self.venv_dir.exists():
            shutil.rmtree(self.venv_dir)
        print(self.colors.green("Virtual environment cleaned."))

    def clean_all(self):
        self.clean_reports()
        self.clean_cache()

    def run_suite(self, name, module, timeout, extra_env=None):
        """Run one test module and write an HTML report under reports/<name>/."""
        print(self.colors.yellow(f"Running {name} tests..."))
        suite_report_dir = self.report_dir / name
        if suite_report_dir.exists():
            shutil.rmtree(suite_report_dir)
        self.report_dir.mkdir(exist_ok=True)

        env = os.environ.copy()
        env["PYTHONPATH"] = str(self.root_dir)
        env.setdefault("GCPC_THREADS", "1")
        env.update(extra_env or {})

        result = self.run_command(
            [
                self.python(),
                "-m",
                "pytest",
                module,
                f"--html={suite_report_dir}/index.html",
                f"--timeout={timeout}",
                "--self-contained-html",
                "-v",
            ],
            check=False,
            env=env,
        )  # Don't fail on test failures

        print(self.colors.green(f"{name} tests completed. Reports generated at {suite_report_dir}/index.html"))
        self.clean_cache()
        return result.returncode

    def test_all(self):
        failed = [name for name, (module, timeout, _) in SUITES.items() if self.run_suite(name, module, timeout)]
        if failed:
            print(self.colors.red(f"Suites with failures: {', '.join(failed)}"))
            sys.exit(1)
        print(self.colors.green("All suites passed."))

    def test_acceptance(self):
        module, timeout, _ = ACCEPTANCE
        if self.run_suite("acceptance", module, timeout, {"GCPC_ACCEPTANCE": "1"}):
            sys.exit(1)


def main():
    """Main entry point."""
    builder = GCPCBuilder()
    commands = {
        "help": builder.show_help,
        "check": builder.check_dependencies,
        "setup": builder.setup_environment,
        "clean": builder.clean_all,
        "clean-cache": builder.clean_cache,
        "clean-reports": builder.clean_reports,
        "clean-venv": builder.clean_venv,
        "test-all": builder.test_all,
        "test-acceptance": builder.test_acceptance,
    }
    for name, (module, timeout, _) in SUITES.items():
        commands[f"test-{name}"] = lambda name=name, module=module, timeout=timeout: builder.run_suite(
            name, module, timeout
        )

    parser = argparse.ArgumentParser(
        description="GCPC Lab Build Script",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Run 'python3 run.py help' for the list of commands.",
    )
    parser.add_argument("command", nargs="?", default="help", choices=list(commands), help="Command to execute")
    args = parser.parse_args()
    commands[args.command]()


if __name__ == "__main__":
    main()
