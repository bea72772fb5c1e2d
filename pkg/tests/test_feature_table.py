"""Feature table extraction and text I/O."""

import io

import numpy as np
import pytest

from modules.errors import TableError
from modules.feature_table import (
    FeatureTable,
    TableMetadata,
    build_table,
    extract_table,
    merge_tables,
    read_table,
    write_table,
)
from modules.glcm import FEATURE_NAMES, OffsetSpec, extract_features
from modules.imaging import UNLABELED, WindowSpec, quantize, tile_windows


def table_text(table: FeatureTable) -> str:
    buffer = io.StringIO()
    write_table(table, buffer)
    return buffer.getvalue()


@pytest.fixture
def quantized_mosaic(mosaic):
    image, labels, class_map = mosaic
    return quantize(image, 8), labels, class_map


class TestExtraction:
    def test_thread_count_does_not_change_output(self, quantized_mosaic):
        image, _, _ = quantized_mosaic
        windows = tile_windows(image, 50)
        metadata = TableMetadata(8, OffsetSpec())
        serial = build_table(windows, extract_table(image, windows, OffsetSpec(), threads=1), metadata=metadata)
        parallel = build_table(windows, extract_table(image, windows, OffsetSpec(), threads=8), metadata=metadata)
        assert table_text(serial) == table_text(parallel)

    def test_order_matches_windows(self, quantized_mosaic):
        image, _, _ = quantized_mosaic
        windows = tile_windows(image, 50)[:7]
        features = extract_table(image, windows, OffsetSpec(), threads=3)
        assert features == [extract_features(image, w, OffsetSpec()) for w in windows]

    def test_empty_window_list(self, quantized_mosaic):
        image, _, _ = quantized_mosaic
        assert extract_table(image, [], OffsetSpec(), threads=4) == []


class TestTableFormat:
    def test_header_and_rows(self):
        table = build_table(
            [WindowSpec(0, 0, 50), WindowSpec(50, 0, 50)],
            [(1.0, 0.0, 1.0, 0.0), (0.5, 1.0, 0.5, 0.693147180559945)],
            [2, 0],
            TableMetadata(8, OffsetSpec()),
        )
        lines = table_text(table).splitlines()
        assert lines[0] == "# texturemap-features levels=8 distance=1 direction=0 symmetric=1 average_directions=0"
        assert lines[1] == "origin_x,origin_y,size,homogeneity,contrast,energy,entropy,label"
        assert lines[2] == "0,0,50,1,0,1,0,2"
        assert lines[3] == "50,0,50,0.5,1,0.5,0.693147181,0"

    def test_unlabeled_table_has_no_label_column(self):
        table = build_table([WindowSpec(0, 0, 4)], [(1.0, 0.0, 1.0, 0.0)])
        assert table_text(table).splitlines()[0] == "origin_x,origin_y,size,homogeneity,contrast,energy,entropy"

    def test_roundtrip(self, tmp_path, quantized_mosaic):
        image, labels, _ = quantized_mosaic
        windows = tile_windows(image, 50)
        offset = OffsetSpec(2, 135, symmetric=False, average_directions=True)
        metadata = TableMetadata(8, offset)
        table = build_table(windows, extract_table(image, windows, offset), [1] * len(windows), metadata)
        path = tmp_path / "features.csv"
        write_table(table, path)

        loaded = read_table(path)
        assert loaded.metadata == metadata
        assert loaded.windows() == windows
        assert loaded.window_size() == 50
        assert np.allclose(loaded.features(), table.features(), rtol=1e-8, atol=0)
        assert table_text(loaded) == path.read_text()

    def test_metadata_parse_rejects_other_comments(self):
        assert TableMetadata.parse("# some other comment") is None

    def test_missing_file(self, tmp_path):
        with pytest.raises(TableError, match="absent.csv"):
            read_table(tmp_path / "absent.csv")

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("origin_x,origin_y,size,homogeneity\n0,0,4,1\n")
        with pytest.raises(TableError, match="contrast"):
            read_table(path)

    def test_misaligned_inputs(self):
        with pytest.raises(TableError):
            build_table([WindowSpec(0, 0, 4)], [])


class TestTrainingSetFromTable:
    def make(self, labels, sizes=None):
        sizes = sizes or [4] * len(labels)
        windows = [WindowSpec(4 * n, 0, s) for n, s in enumerate(sizes)]
        features = [(0.1 * n, float(n), 0.5, 1.0) for n in range(len(labels))]
        return build_table(windows, features, labels)

    def test_unlabeled_rows_dropped(self):
        data = self.make([0, UNLABELED, 1, 1]).training_set()
        assert len(data) == 3
        assert data.class_counts() == {0: 1, 1: 2}
        assert data.n_features == len(FEATURE_NAMES)

    def test_no_label_column(self):
        table = build_table([WindowSpec(0, 0, 4)], [(1.0, 0.0, 1.0, 0.0)])
        with pytest.raises(TableError):
            table.training_set()

    def test_all_unlabeled(self):
        with pytest.raises(TableError):
            self.make([UNLABELED, UNLABELED]).training_set()

    def test_single_class(self):
        with pytest.raises(TableError):
            self.make([1, 1, 1]).training_set()

    def test_mixed_window_sizes(self):
        with pytest.raises(TableError):
            self.make([0, 1], sizes=[4, 6]).window_size()


class TestMerge:
    def test_concatenates(self):
        a = build_table([WindowSpec(0, 0, 4)], [(1.0, 0.0, 1.0, 0.0)], [0], TableMetadata(8, OffsetSpec()))
        b = build_table([WindowSpec(4, 0, 4)], [(0.5, 1.0, 0.5, 0.7)], [1], TableMetadata(8, OffsetSpec()))
        merged = merge_tables([a, b])
        assert len(merged) == 2
        assert merged.metadata == a.metadata

    def test_different_settings(self):
        a = build_table([WindowSpec(0, 0, 4)], [(1.0, 0.0, 1.0, 0.0)], [0], TableMetadata(8, OffsetSpec()))
        b = build_table([WindowSpec(4, 0, 4)], [(0.5, 1.0, 0.5, 0.7)], [1], TableMetadata(16, OffsetSpec()))
        with pytest.raises(TableError):
            merge_tables([a, b])

    def test_nothing_to_merge(self):
        with pytest.raises(TableError):
            merge_tables([])
