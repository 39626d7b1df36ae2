
from experiments_csv import single_plot_results, multi_plot_results


def plot_identification_results():
     for y_field in ["validation_rmse_mV", "low_soc_rmse_mV", "low_temp_rmse_mV", "calibration_s"]:
          multi_plot_results(
               results_csv_file="results/identification.csv",
               save_to_file=f"results/identification_{y_field}.png",
               filter={},
               x_field="noise_sigma_mV", y_field=y_field, z_field="model_kind", mean=True,
               subplot_field="n_particles", subplot_rows=1, subplot_cols=2, sharey=True, sharex=True,
               legend_properties={"size":6},
               )


def plot_oracle_results():
     for y_field in ["max_error_mV", "rms_error_mV"]:
          single_plot_results(
               results_csv_file="results/rom_vs_fdm.csv",
               save_to_file=f"results/rom_vs_fdm_{y_field}.png",
               filter={},
               x_field="c_rate", y_field=y_field, z_field="temperature", mean=True,
               )


plot_identification_results()
plot_oracle_results()
