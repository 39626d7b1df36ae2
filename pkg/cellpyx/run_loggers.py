"""
Loggers that narrate a run dataset by dataset: which datasets were used,
how each simulation went, and the accuracy reached on each.

Every method takes an optional `datasets=` keyword: None addresses all
datasets, a string one dataset, a list several.

Programmer: cellpyx team
Since: 2024-05
"""

import logging

import numpy as np


TEXTS = {
    "dataset": "Dataset %s: %s profile at %g C, role %s, %d samples over %.0f s.",
    "initial_soc": "Initial SOC %.3f.",
    "aborted": "The %s simulation stopped at sample %d of %d: %s",
    "accuracy": "%s RMSE %.2f mV over %d samples.",
    "segment": "%s RMSE at %s: %.2f mV over %d samples.",
}


class RunLogger:
    """
    The base run logger does nothing.
    """

    def warning(self, message:str, *args, datasets=None):
        pass

    def info(self, message:str, *args, datasets=None):
        pass

    def debug(self, message:str, *args, datasets=None):
        pass

    def explain_datasets(self, datasets:list):
        for dataset in datasets:
            series = dataset.series
            self.info(TEXTS["dataset"], dataset.id, dataset.profile_kind, dataset.ambient_temp,
                      dataset.role, len(series), series.duration, datasets=dataset.id)
            if dataset.initial_soc is not None:
                self.info(TEXTS["initial_soc"], dataset.initial_soc, datasets=dataset.id)

    def explain_accuracy(self, report):
        """ Narrate an AccuracyReport: one block per dataset. """
        for row in report.rows:
            if row.aborted_at is not None:
                self.warning(TEXTS["aborted"], report.kind.upper(), row.aborted_at, row.n_samples, row.abort_reason, datasets=row.dataset_id)
            if row.n_completed:
                self.info(TEXTS["accuracy"], report.kind.upper(), 1000*row.rmse, row.n_completed, datasets=row.dataset_id)
            if row.n_low_soc:
                self.info(TEXTS["segment"], report.kind.upper(), "low SOC", 1000*row.low_soc_rmse, row.n_low_soc, datasets=row.dataset_id)
            if row.n_low_temp:
                self.info(TEXTS["segment"], report.kind.upper(), "low temperature", 1000*row.low_temp_rmse, row.n_low_temp, datasets=row.dataset_id)


class SingleRunLogger(RunLogger):
    """
    A run logger in which all messages are written to the same single base-logger.
    """
    def __init__(self, logger:logging.Logger):
        self.logger = logger

    def _log(self, level:int, message:str, *args, datasets=None):
        if datasets is None or not is_individual_dataset(datasets):
            self.logger.log(level, message, *args)
        else:
            self.logger.log(level, str(datasets)+": "+message.strip(), *args)

    def debug(self, message:str, *args, datasets=None):
        self._log(logging.DEBUG, message, *args, datasets=datasets)

    def info(self, message:str, *args, datasets=None):
        self._log(logging.INFO, message, *args, datasets=datasets)

    def warning(self, message:str, *args, datasets=None):
        self._log(logging.WARNING, message, *args, datasets=datasets)


class ConsoleRunLogger(SingleRunLogger):
    """
    A convenience class: a run logger in which all messages are written to the console.
    """
    def __init__(self, level=logging.DEBUG):
        logger = logging.getLogger("Run console")
        logger.setLevel(level)
        if not logger.handlers:
            logger.addHandler(logging.StreamHandler())
        super().__init__(logger)


class RunLoggerPerDataset(RunLogger):
    """
    A run logger in which there is one logger per dataset.
    """

    def __init__(self, map_dataset_to_logger:dict):
        self.map_dataset_to_logger = map_dataset_to_logger

    def _targets(self, datasets) -> list:
        if datasets is None:
            return list(self.map_dataset_to_logger.values())
        if is_individual_dataset(datasets):
            return [self.map_dataset_to_logger[datasets]]
        return [self.map_dataset_to_logger[dataset] for dataset in datasets]

    def debug(self, message:str, *args, datasets=None):
        for logger in self._targets(datasets):
            logger.debug(message, *args)

    def info(self, message:str, *args, datasets=None):
        for logger in self._targets(datasets):
            logger.info(message, *args)

    def warning(self, message:str, *args, datasets=None):
        for logger in self._targets(datasets):
            logger.warning(message, *args)


class FilesRunLogger(RunLoggerPerDataset):
    """
    A convenience class: all messages for each dataset are written to a dataset-specific file.
    """
    def __init__(self, map_dataset_to_filename:dict, level=logging.DEBUG, **kwargs):
        map_dataset_to_logger = {}
        for dataset,filename in map_dataset_to_filename.items():
            logger = logging.getLogger(f"Run file for dataset {dataset}")
            logger.setLevel(level)
            logger.propagate = False
            logger.addHandler(logging.FileHandler(filename, **kwargs))
            map_dataset_to_logger[dataset] = logger
        super().__init__(map_dataset_to_logger)


class LogStream(object):
    def __init__(self):
        self.text = ''
    def write(self, str):
        self.text += str
    def flush(self):
        pass
    def __str__(self):
        return self.text


class StringsRunLogger(RunLoggerPerDataset):
    """
    A convenience class: all messages for each dataset are written to a dataset-specific string.

    >>> run_logger = StringsRunLogger(["d1", "d2"])
    >>> run_logger.info("Simulated %d samples.", 10, datasets="d1")
    >>> run_logger.info("Done.")
    >>> run_logger.dataset_string("d1")
    'Simulated 10 samples.\\nDone.\\n'
    >>> run_logger.dataset_string("d2")
    'Done.\\n'
    """
    def __init__(self, datasets:list, level=logging.DEBUG):
        map_dataset_to_logger = {}
        self.map_dataset_to_stream = {}
        for dataset in datasets:
            self.map_dataset_to_stream[dataset] = LogStream()
            logger = logging.getLogger(f"Run string for dataset {dataset} {id(self)}")
            logger.setLevel(level)
            logger.propagate = False
            logger.addHandler(logging.StreamHandler(self.map_dataset_to_stream[dataset]))
            map_dataset_to_logger[dataset] = logger
        super().__init__(map_dataset_to_logger)

    def dataset_string(self, dataset:str) -> str:
        return str(self.map_dataset_to_stream[dataset])

    def map_dataset_to_text(self) -> dict:
        return {
            dataset: str(stream)
            for dataset,stream in self.map_dataset_to_stream.items()
        }


def is_individual_dataset(datasets) -> bool:
    return isinstance(datasets, (str, int, np.integer))
