#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace leoho::link {

/// Uplink budget terms of a ground terminal.
struct TerminalProfile {
  std::string name;
  double carrier_f_ghz = 30.0;
  double bandwidth_hz = 400e6;
  double tx_power_dbm = 33.0;
  double tx_antenna_gain_dbi = 43.2;
  double atmospheric_loss_db = 0.5;
  double shadow_margin_db = 0.0;
  double scintillation_loss_db = 0.3;
  double g_over_t_db_per_k = 13.0;
  double boltzmann_dbw_per_k_per_hz = -228.6;

  double eirp_dbw() const { return (tx_power_dbm - 30.0) + tx_antenna_gain_dbi; }
  void validate() const;
};

TerminalProfile handheld_profile();
TerminalProfile vsat_profile();
/// "handheld" or "vsat"; throws std::invalid_argument otherwise.
TerminalProfile profile_by_name(const std::string& name);

/// Free-space path loss, f in GHz and d in km. Throws std::domain_error for
/// non-positive arguments.
double fspl(double f_ghz, double d_km);

double cnr(const TerminalProfile& profile, double d_km);

/// Downlink RSRP stand-in. Only differences between satellites are meaningful.
double rsrp_proxy(double dl_eirp_dbw, double d_km, double f_ghz, double shadowing_db);

/// One step of the L3 IIR filter. Throws std::domain_error unless 0 < beta <= 1.
double l3_filter(double m_l3_prev, double m_l1, double beta);

/// Entering condition of event A3 (strict inequality).
inline bool a3_event(double m_l3_serving, double m_l3_target, double offset_db) {
  return m_l3_target > m_l3_serving + offset_db;
}

/// beta = 1 / 2^(k/4)
double forgetting_factor(int k_iir);

/// Filtered and instantaneous measurements of every (UE, plane) pair plus
/// the shared filter settings. Plane 0 is the serving satellite.
class MeasurementState {
 public:
  MeasurementState() = default;
  MeasurementState(std::size_t num_ues, std::size_t num_planes, int k_iir,
                   double measurement_period_s, double a3_offset_db);

  std::size_t num_ues() const { return num_ues_; }
  std::size_t num_planes() const { return num_planes_; }
  double beta() const { return beta_; }
  int k_iir() const { return k_iir_; }
  double measurement_period_s() const { return measurement_period_s_; }
  double update_period_s() const { return measurement_period_s_ / beta_; }
  double a3_offset_db() const { return a3_offset_db_; }

  double l1(std::size_t ue, std::size_t plane) const { return l1_[ue * num_planes_ + plane]; }
  double l3(std::size_t ue, std::size_t plane) const { return l3_[ue * num_planes_ + plane]; }
  bool initialized() const { return initialized_; }

  /// Folds one L1 sample per (UE, plane). The first call seeds the filter
  /// with the sample itself.
  void ingest(const std::vector<double>& l1_samples);
  /// Overwrites the filtered value; used by tests and scripted scenarios.
  void set_l3(std::size_t ue, std::size_t plane, double value);

  /// A3 condition of `ue` against target plane `target` (>= 1).
  bool a3(std::size_t ue, std::size_t target) const;

 private:
  std::size_t num_ues_ = 0;
  std::size_t num_planes_ = 0;
  int k_iir_ = 4;
  double beta_ = 0.5;
  double measurement_period_s_ = 0.15;
  double a3_offset_db_ = 1.0;
  bool initialized_ = false;
  std::vector<double> l1_;
  std::vector<double> l3_;
};

}  // namespace leoho::link
