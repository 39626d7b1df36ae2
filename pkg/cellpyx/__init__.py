# Infrastructure:
from cellpyx.cells import CellSpec, OcpCurve, OcvSurface, SegmentedArrhenius, REFERENCE_CELL
from cellpyx.timeseries import TimeSeries, Dataset
from cellpyx.parameters import PbmParams, EcmParams, ModelDocument, reference_pbm_params, reference_ecm_params
from cellpyx.hysteresis import HysteresisParams, HysteresisState, reference_hysteresis_params
from cellpyx.accuracy import AccuracyReport, RmseMatrix
from cellpyx.run_loggers import RunLogger, ConsoleRunLogger, StringsRunLogger, FilesRunLogger
from cellpyx.adaptors import build_model, model_from_document, simulate, evaluate_accuracy

import cellpyx.models as models
import cellpyx.identify as identify
