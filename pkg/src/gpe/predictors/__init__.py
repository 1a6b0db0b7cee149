"""Regression models (KNN, CART, random forest), metrics and evaluation."""

from gpe.predictors.dataset import Dataset, load_dataset, parse_dataset
from gpe.predictors.evaluate import cross_val_predict, fold_indices, kfold_cv, select_best
from gpe.predictors.forest import RandomForest, fit_forest
from gpe.predictors.knn import KnnModel, fit_knn
from gpe.predictors.metrics import Metrics, mape, metrics, r2
from gpe.predictors.model import ModelSpec, TrainedModel, load_model, save_model, train
from gpe.predictors.tree import DecisionTree, Stopping, fit_tree

__all__ = [
    "Dataset", "DecisionTree", "KnnModel", "Metrics", "ModelSpec", "RandomForest", "Stopping",
    "TrainedModel", "cross_val_predict", "fit_forest", "fit_knn", "fit_tree", "fold_indices",
    "kfold_cv", "load_dataset", "load_model", "mape", "metrics", "parse_dataset", "r2",
    "save_model", "select_best", "train",
]
