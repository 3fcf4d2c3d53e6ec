"""
Load a real regression dataset from delimited text: one label column, the rest
features, optionally standardized, subsampled and split into a held-out tail.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.preprocessing import StandardScaler

from locsketch.core.exc import ValidationError
from locsketch.core.fmx import read_delimited_frame
from locsketch.core.structure import PartitionedMatrix, RandomSource
from locsketch.solvers.ridge import RidgeProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    test_features: np.ndarray
    test_labels: np.ndarray
    feature_columns: list[int]
    feature_mean: np.ndarray | None = None
    feature_scale: np.ndarray | None = None

    def partitioned(self, blocks: int) -> PartitionedMatrix:
        return PartitionedMatrix.from_equal_blocks(self.features, blocks)

    def ridge_problem(self, lam: float, blocks: int) -> RidgeProblem:
        return RidgeProblem(self.partitioned(blocks), self.labels, lam)


def load_dataset(
    path: str | Path,
    label_column: int = 0,
    standardize: bool = False,
    subsample: int | None = None,
    seed: RandomSource | None = None,
    test_rows: int = 0,
) -> Dataset:
    """
    Parameters:
        path: delimited text file without a header.
        label_column: index of the label column; negative values count from the end.
        standardize: centre each feature column and scale it to unit variance,
            with statistics fitted on the training rows only. Constant columns are
            dropped.
        subsample: number of training rows kept, drawn uniformly without
            replacement and kept in file order.
        seed: random stream for the subsample.
        test_rows: number of trailing rows held out before subsampling.

    Returns:
        Dataset with training and held-out features and labels.
    """
    frame = read_delimited_frame(path)
    data = frame.to_numpy()
    n_rows, n_cols = data.shape
    if n_cols < 2:
        raise ValidationError(f"{path} needs a label column and at least one feature")
    if not -n_cols <= label_column < n_cols:
        raise ValidationError(f"label column {label_column} out of range for {n_cols}")
    label_column %= n_cols
    feature_columns = [c for c in range(n_cols) if c != label_column]

    if not 0 <= test_rows < n_rows:
        raise ValidationError(f"test_rows must be in [0, {n_rows})")
    train, test = data[: n_rows - test_rows], data[n_rows - test_rows :]

    if subsample is not None:
        if subsample < 1:
            raise ValidationError("subsample must be positive")
        if subsample < train.shape[0]:
            rng = (seed or RandomSource(0)).generator()
            keep = np.sort(rng.choice(train.shape[0], size=subsample, replace=False))
            train = train[keep]
        else:
            logger.warning(
                "Subsample of %d rows is not smaller than the %d available",
                subsample,
                train.shape[0],
            )

    features, labels = train[:, feature_columns], train[:, label_column]
    test_features, test_labels = test[:, feature_columns], test[:, label_column]
    mean = scale = None
    if standardize:
        spread = features.std(axis=0)
        constant = np.flatnonzero(spread == 0)
        if constant.size:
            logger.warning("Dropping %d constant feature columns", constant.size)
            retained = np.flatnonzero(spread > 0)
            feature_columns = [feature_columns[i] for i in retained]
            features, test_features = features[:, retained], test_features[:, retained]
        scaler = StandardScaler().fit(features)
        features = scaler.transform(features)
        if test_features.shape[0]:
            test_features = scaler.transform(test_features)
        mean, scale = scaler.mean_, scaler.scale_

    logger.info(
        "Loaded %s: %d training rows, %d held out, %d features",
        path,
        features.shape[0],
        test_features.shape[0],
        features.shape[1],
    )
    return Dataset(
        features=np.ascontiguousarray(features),
        labels=np.ascontiguousarray(labels),
        test_features=np.ascontiguousarray(test_features),
        test_labels=np.ascontiguousarray(test_labels),
        feature_columns=feature_columns,
        feature_mean=mean,
        feature_scale=scale,
    )
