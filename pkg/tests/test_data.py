import hashlib
import io
import urllib.request

import numpy as np
import pytest

from adcprune.data import (
    CsvSchema,
    cache_root,
    fetch,
    load_csv,
    load_manifest,
    schema_from_manifest,
    stratified_split,
)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_blob_fixture_shape(self, blob_csv):
        path = blob_csv("seedsish", 210, 7, 3, seed=1)
        ds = load_csv(path, CsvSchema(label_column=-1))
        assert (ds.n_samples, ds.n_features, ds.n_classes) == (210, 7, 3)
        assert ds.features.min() >= 0.0 and ds.features.max() <= 1.0

    def test_min_max_endpoints(self, tmp_path):
        path = write(tmp_path, "0,5,a\n10,7,b\n")
        ds = load_csv(path)
        assert ds.features[:, 0].tolist() == [0.0, 1.0]
        assert ds.feature_mins[0] == 0.0 and ds.feature_maxes[0] == 10.0

    def test_malformed_row_dropped_with_count(self, tmp_path):
        path = write(tmp_path, "1,2,a\n3,oops,b\n5,6,a\n7,8,b\n9,10,a\n")
        ds = load_csv(path)
        assert ds.n_samples == 4
        assert ds.dropped_rows == 1

    def test_missing_cells_dropped(self, tmp_path):
        path = write(tmp_path, "1,2,a\n?,4,b\n5,,a\n7,8,b\n")
        ds = load_csv(path)
        assert ds.n_samples == 2
        assert ds.dropped_rows == 2

    def test_wrong_arity_rows_dropped(self, tmp_path):
        path = write(tmp_path, "1,2,a\n3,4\n5,6,b\n")
        ds = load_csv(path)
        assert ds.n_samples == 2
        assert ds.dropped_rows == 1

    def test_label_mapping_dense_and_recorded(self, tmp_path):
        path = write(tmp_path, "1,x\n2,z\n3,y\n4,x\n")
        ds = load_csv(path)
        assert ds.label_names == ("x", "y", "z")
        assert ds.labels.tolist() == [0, 2, 1, 0]

    def test_header_and_named_label_column(self, tmp_path):
        path = write(tmp_path, "f1,f2,target\n1,2,a\n3,4,b\n")
        ds = load_csv(path, CsvSchema(label_column="target", header=True))
        assert ds.n_features == 2
        assert ds.label_names == ("a", "b")

    def test_drop_columns(self, tmp_path):
        path = write(tmp_path, "id1,1,2,a\nid2,3,4,b\n")
        with pytest.raises(ValueError):
            load_csv(path)  # id column is not numeric
        ds = load_csv(path, CsvSchema(label_column=-1, drop_columns=(0,)))
        assert ds.n_features == 2

    def test_constant_feature_normalized_to_zero_and_flagged(self, tmp_path):
        path = write(tmp_path, "5,1,a\n5,2,b\n5,3,a\n")
        ds = load_csv(path)
        assert ds.constant_features == (0,)
        assert (ds.features[:, 0] == 0.0).all()

    def test_whitespace_delimiter(self, tmp_path):
        path = write(tmp_path, "1.0  2.0\t3.0 a\n4.0 5.0 6.0 b\n")
        ds = load_csv(path, CsvSchema(label_column=-1, delimiter=None))
        assert ds.n_features == 3

    def test_errors(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_csv(tmp_path / "nope.csv")
        with pytest.raises(ValueError):
            load_csv(write(tmp_path, "?,?,a\n?,?,b\n"))  # zero usable rows
        with pytest.raises(ValueError):
            load_csv(write(tmp_path, "1,2,a\n3,4,a\n"))  # single class

    def test_normalization_idempotent(self, blob_csv):
        path = blob_csv("idem", 50, 3, 2, seed=2)
        ds = load_csv(path, CsvSchema(label_column=-1))
        rows = ["%.10f,%.10f,%.10f,c%d" % (*ds.features[i], ds.labels[i]) for i in range(50)]
        path2 = path.parent / "renorm.csv"
        path2.write_text("\n".join(rows) + "\n")
        ds2 = load_csv(path2)
        assert np.allclose(ds.features, ds2.features, atol=1e-9)


class TestStratifiedSplit:
    def test_per_class_rounding(self, tmp_path):
        rows = [f"{i},{i % 7},a" for i in range(60)] + [f"{i},{i % 5},b" for i in range(40)]
        ds = load_csv(write(tmp_path, "\n".join(rows) + "\n"))
        split = stratified_split(ds, train_frac=0.7, seed=0)
        train_labels = ds.labels[split.train]
        assert len(split.train) == 70
        assert int((train_labels == 0).sum()) == 42
        assert int((train_labels == 1).sum()) == 28

    def test_disjoint_and_covering(self, blob_dataset):
        ds = blob_dataset("cov", 123, 4, 3, seed=5)
        split = stratified_split(ds, seed=7)
        merged = np.sort(np.concatenate([split.train, split.test]))
        assert merged.tolist() == list(range(123))

    def test_train_size_is_round_of_fraction(self, blob_dataset):
        for n, frac in ((123, 0.7), (210, 0.7), (57, 0.6)):
            ds = blob_dataset(f"size{n}", n, 3, 3, seed=n)
            split = stratified_split(ds, train_frac=frac, seed=1)
            assert len(split.train) == int(round(frac * n))

    def test_proportions_within_one_sample(self, blob_dataset):
        ds = blob_dataset("prop", 97, 3, 3, seed=9)
        split = stratified_split(ds, train_frac=0.7, seed=2)
        for c in range(ds.n_classes):
            n_c = int((ds.labels == c).sum())
            in_train = int((ds.labels[split.train] == c).sum())
            assert abs(in_train - 0.7 * n_c) <= 1.0

    def test_determinism(self, blob_dataset):
        ds = blob_dataset("det", 80, 3, 2, seed=11)
        a = stratified_split(ds, seed=5)
        b = stratified_split(ds, seed=5)
        c = stratified_split(ds, seed=6)
        assert a.train.tolist() == b.train.tolist()
        assert a.test.tolist() == b.test.tolist()
        assert a.train.tolist() != c.train.tolist()

    def test_full_fraction_rejected(self, blob_dataset):
        ds = blob_dataset("full", 40, 3, 2, seed=12)
        with pytest.raises(ValueError):
            stratified_split(ds, train_frac=1.0)
        with pytest.raises(ValueError):
            stratified_split(ds, train_frac=0.001)

    def test_singleton_class_error_names_it(self, tmp_path):
        path = write(tmp_path, "1,2,common\n3,4,common\n5,6,common\n7,8,rare\n")
        ds = load_csv(path)
        with pytest.raises(ValueError, match="rare"):
            stratified_split(ds)


class TestManifest:
    def test_lists_the_six_benchmarks(self):
        manifest = load_manifest()
        assert set(manifest) == {
            "balance", "breast_cancer", "cardio", "mammographic", "seeds", "vertebral",
        }
        for entry in manifest.values():
            assert {"url", "file", "label_column", "shape"} <= set(entry)

    def test_schema_from_manifest(self):
        manifest = load_manifest()
        schema = schema_from_manifest(manifest["breast_cancer"])
        assert schema.label_column == -1
        assert schema.drop_columns == (0,)
        assert schema_from_manifest(manifest["seeds"]).delimiter is None

    def test_cache_root_env_override(self, monkeypatch, tmp_path):
        monkeypatch.setenv("ADCPRUNE_CACHE", str(tmp_path / "cache"))
        assert cache_root() == tmp_path / "cache"


class TestFetch:
    PAYLOAD = b"1,2,a\n3,4,b\n5,6,a\n7,8,b\n"

    def _serve(self, monkeypatch, payload):
        def fake_urlopen(url, timeout=60):
            return io.BytesIO(payload)

        monkeypatch.setattr(urllib.request, "urlopen", fake_urlopen)

    def test_records_checksum_on_first_fetch(self, monkeypatch, tmp_path):
        self._serve(monkeypatch, self.PAYLOAD)
        path = fetch("balance", dest=tmp_path)
        assert path.read_bytes() == self.PAYLOAD
        digest_file = path.with_suffix(path.suffix + ".sha256")
        assert digest_file.read_text().strip() == hashlib.sha256(self.PAYLOAD).hexdigest()

    def test_verifies_recorded_checksum(self, monkeypatch, tmp_path):
        self._serve(monkeypatch, self.PAYLOAD)
        path = fetch("balance", dest=tmp_path)
        path.write_bytes(b"tampered")
        with pytest.raises(ValueError, match="sha256"):
            fetch("balance", dest=tmp_path)

    def test_unknown_name(self, tmp_path):
        with pytest.raises(KeyError):
            fetch("unknown_set", dest=tmp_path)

    def test_zip_archive_extraction(self, monkeypatch, tmp_path):
        import zipfile

        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w") as zf:
            zf.writestr("column_3C.dat", "1 2 3 DH\n4 5 6 NO\n")
            zf.writestr("column_2C.dat", "ignored")
        self._serve(monkeypatch, buf.getvalue())
        path = fetch("vertebral", dest=tmp_path)
        assert path.name == "column_3C.dat"
        assert path.read_text().startswith("1 2 3 DH")
