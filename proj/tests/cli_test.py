"""End-to-end checks of the hgsqz command-line tool.

Every JSON document the tool writes is validated against the schema files in
schemas/. Run by ctest; HGSQZ_CLI, HGSQZ_SCHEMAS and HGSQZ_CONFIGS are set
there.
"""

import csv
import io
import json
import os
import pathlib
import re
import subprocess
import tempfile
import unittest

import jsonschema
from referencing import Registry, Resource

CLI = os.environ["HGSQZ_CLI"]
SCHEMAS = pathlib.Path(os.environ["HGSQZ_SCHEMAS"])
CONFIGS = pathlib.Path(os.environ["HGSQZ_CONFIGS"])
PRESETS = ["aligned", "misaligned", "compensated", "hom-only-aligned", "hom-only-misaligned"]


def _registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


REGISTRY = _registry()


def validate(doc, name):
    schema = REGISTRY.contents(f"urn:hgsqz:schema:{name}")
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(doc)


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True, check=False)


def run_json(*args, schema):
    res = run(*args)
    if res.returncode != 0:
        raise AssertionError(f"{args} exited {res.returncode}: {res.stderr}")
    doc = json.loads(res.stdout)
    validate(doc, schema)
    return doc


def read_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


class Reports(unittest.TestCase):
    def test_presets_validate(self):
        for name in PRESETS:
            with self.subTest(name):
                run_json("preset", name, schema="report")
                run_json("simulate", "--preset", name, "--trace", schema="report")
                cfg = run_json("preset", name, "--emit-config", schema="preset_config")
                validate(cfg["config"], "config")
                self.assertTrue(cfg["provenance"])

    def test_preset_values(self):
        aligned = run_json("preset", "aligned", schema="report")
        self.assertAlmostEqual(aligned["squeezing_db"], -5.80, delta=0.005)
        self.assertAlmostEqual(aligned["loss_estimate"]["epsilon"], 0.0, delta=1e-9)
        mis = run_json("preset", "misaligned", schema="report")
        self.assertAlmostEqual(mis["squeezing_db"], -5.02, delta=0.005)
        self.assertAlmostEqual(mis["loss_estimate"]["epsilon"], 0.070, delta=1e-6)
        self.assertAlmostEqual(mis["mode_report"]["higher_order_power"], 0.07, delta=1e-4)
        comp = run_json("preset", "compensated", schema="report")
        self.assertAlmostEqual(comp["squeezing_db"], -5.69, delta=0.01)
        flat = run_json("preset", "hom-only-aligned", schema="report")
        self.assertEqual(flat["loss_estimate"]["status"], "degenerate")

    def test_shipped_configs(self):
        for path in sorted(CONFIGS.glob("*.json")):
            with self.subTest(path.name):
                validate(json.loads(path.read_text()), "config")
                doc = run_json("simulate", "--config", str(path), schema="report")
                # The echoed config is a complete, valid config that reproduces the run.
                with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
                    json.dump(doc["config"], f)
                try:
                    again = run_json("simulate", "--config", f.name, schema="report")
                finally:
                    os.unlink(f.name)
                self.assertEqual(doc, again)

    def test_mode_report(self):
        doc = run_json("mode-report", "--preset", "misaligned", schema="mode_report")
        powers = {tuple(m["mode"]): m["power"] for m in doc["modes"]}
        self.assertAlmostEqual(powers[(0, 0)], 0.93, delta=1e-9)
        self.assertAlmostEqual(powers[(0, 1)], 0.0675, delta=1e-4)
        self.assertEqual(len(doc["modes"]), 28)

    def test_optimize(self):
        doc = run_json("optimize", "--preset", "misaligned", "--modes", "0,1", "--max-db", "5.8", schema="plan")
        self.assertAlmostEqual(doc["achieved_db"], -5.77, delta=0.005)
        self.assertLessEqual(doc["achieved_variance"], doc["baseline_variance"])
        doc = run_json("optimize", "--preset", "aligned", "--modes", "2,0;0,2", schema="plan")
        self.assertEqual([s["squeeze_db"] for s in doc["compensating_sources"]], [0.0, 0.0])

    def test_meta_only_on_request(self):
        plain = run_json("preset", "aligned", schema="report")
        self.assertNotIn("meta", plain)
        with_meta = run_json("preset", "aligned", "--meta", schema="report")
        self.assertEqual(with_meta["meta"]["tool"], "hgsqz")
        with_meta.pop("meta")
        self.assertEqual(plain, with_meta)


class EstimateLoss(unittest.TestCase):
    def test_consistent_pair(self):
        doc = run_json("estimate-loss", "--sqz-db=-5.9176", "--antisqz-db=6.7394", schema="estimate")
        self.assertAlmostEqual(doc["epsilon"], 0.070, delta=5e-5)
        self.assertAlmostEqual(doc["r"], 0.80472, delta=5e-5)

    def test_shot_noise_pair_is_degenerate(self):
        doc = run_json("estimate-loss", "--sqz-db=0", "--antisqz-db=0", schema="estimate")
        self.assertTrue(doc["degenerate"])
        self.assertIsNone(doc["epsilon"])
        self.assertEqual(doc["r"], 0.0)

    def test_unphysical_pairs_exit_one(self):
        for sqz, anti in [("-3", "-3"), ("-6.99", "6.74")]:
            with self.subTest((sqz, anti)):
                res = run("estimate-loss", f"--sqz-db={sqz}", f"--antisqz-db={anti}")
                self.assertEqual(res.returncode, 1)
                err = json.loads(res.stderr)
                validate(err, "error")
                self.assertEqual(err["error"]["kind"], "unphysical-pair")
                self.assertEqual(res.stdout, "")


class Errors(unittest.TestCase):
    def expect(self, code, *args):
        res = run(*args)
        self.assertEqual(res.returncode, code, res.stderr)
        err = json.loads(res.stderr.strip().splitlines()[-1])
        validate(err, "error")
        self.assertEqual(err["error"]["exit_code"], code)
        return err["error"]

    def test_missing_config(self):
        err = self.expect(2, "simulate", "--config", "/nonexistent/cfg.json")
        self.assertIn("config not found", err["message"])

    def test_bad_configs(self):
        cases = {
            '{\n  "sources": [\n    {"mode": [0,0] "squeeze_db": 3}\n  ]\n}': "line 3",
            '{"sources": [], "extra": 1}': "extra",
            '{"sources": [{"mode": [0, 0], "squeeze_db": 3}, {"mode": [0, 0], "squeeze_db": 2}]}': "sources[1].mode",
            '{"sources": [], "distortion": {"etax": 0}}': "distortion.etax",
            '{"sources": [], "detection_loss": 1.0}': "detection_loss",
        }
        for text, marker in cases.items():
            with self.subTest(marker):
                with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
                    f.write(text)
                try:
                    err = self.expect(2, "simulate", "--config", f.name)
                finally:
                    os.unlink(f.name)
                self.assertIn(marker, err["message"] + err.get("field", ""))

    def test_usage_errors(self):
        self.expect(2)
        self.expect(2, "frobnicate")
        self.expect(2, "preset", "no-such-preset")
        self.expect(2, "simulate")
        self.expect(2, "sweep", "--preset", "aligned", "--samples", "1")
        self.expect(2, "optimize", "--preset", "misaligned", "--modes", "0,0")
        self.expect(2, "optimize", "--preset", "misaligned", "--modes", "banana")


class Sweeps(unittest.TestCase):
    def sweep(self, *args):
        res = run("sweep", *args)
        self.assertEqual(res.returncode, 0, res.stderr)
        return res.stdout

    def test_csv_format(self):
        text = self.sweep("--preset", "misaligned", "--samples", "64")
        lines = text.splitlines()
        self.assertEqual(lines[0], "phase_rad,variance,variance_db")
        self.assertEqual(len(lines), 65)
        number = r"-?\d\.\d{11}e[+-]\d{2}"
        for line in lines[1:]:
            self.assertRegex(line, rf"^{number},{number},{number}$")

    def test_vacuum_config_is_flat(self):
        _, rows = read_csv(self.sweep("--config", str(CONFIGS / "vacuum.json")))
        self.assertEqual(len(rows), 512)
        self.assertTrue(all(r[1] == 1.0 for r in rows))

    def test_hom_only(self):
        _, rows = read_csv(self.sweep("--preset", "hom-only-aligned"))
        self.assertTrue(all(abs(r[1] - 1.0) <= 1e-9 for r in rows))
        _, rows = read_csv(self.sweep("--preset", "hom-only-misaligned"))
        values = [r[1] for r in rows]
        self.assertLess(min(values), 1.0)
        self.assertGreater(max(values), 1.0)

    def test_json_format(self):
        doc = run_json("sweep", "--preset", "compensated", "--format", "json", "--samples", "32", schema="sweep")
        self.assertEqual(len(doc["variance"]), 32)

    def test_meta_goes_to_stderr_for_csv(self):
        res = run("sweep", "--preset", "aligned", "--samples", "8", "--meta")
        self.assertEqual(res.stdout, self.sweep("--preset", "aligned", "--samples", "8"))
        validate(json.loads(res.stderr), "meta")


class Determinism(unittest.TestCase):
    def test_byte_identical(self):
        for args in (["preset", "compensated"], ["sweep", "--preset", "hom-only-misaligned"],
                     ["optimize", "--preset", "misaligned", "--modes", "0,1;0,2"],
                     ["simulate", "--config", str(CONFIGS / "waist_mismatch.json"), "--trace"]):
            with self.subTest(args[0]):
                first = subprocess.run([CLI, *args], capture_output=True, check=True).stdout
                second = subprocess.run([CLI, *args], capture_output=True, check=True).stdout
                self.assertEqual(first, second)

    def test_out_file_matches_stdout(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = pathlib.Path(tmp) / "trace.csv"
            res = run("sweep", "--preset", "misaligned", "--out", str(out))
            self.assertEqual(res.returncode, 0)
            self.assertEqual(res.stdout, "")
            self.assertEqual(out.read_text(), run("sweep", "--preset", "misaligned").stdout)


class Schemas(unittest.TestCase):
    def test_schemas_are_well_formed(self):
        for path in SCHEMAS.glob("*.schema.json"):
            with self.subTest(path.name):
                jsonschema.Draft202012Validator.check_schema(json.loads(path.read_text()))

    def test_config_schema_rejects_what_the_tool_rejects(self):
        bad = [{"sources": [], "extra": 1}, {}, {"sources": [{"mode": [0, 0]}]},
               {"sources": [], "distortion": {"etay": -1}}, {"sources": [], "basis_cutoff": 2.5}]
        for doc in bad:
            with self.subTest(doc):
                with self.assertRaises(jsonschema.ValidationError):
                    validate(doc, "config")


if __name__ == "__main__":
    unittest.main(verbosity=2)
