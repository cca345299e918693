#include "leoho/link.hpp"

#include <cmath>
#include <stdexcept>

namespace leoho::link {

void TerminalProfile::validate() const {
  if (!(carrier_f_ghz > 0.0)) throw std::invalid_argument("profile.carrier_f_ghz must be > 0");
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("profile.bandwidth_hz must be > 0");
  if (atmospheric_loss_db < 0.0 || shadow_margin_db < 0.0 || scintillation_loss_db < 0.0)
    throw std::invalid_argument("profile loss terms must be >= 0");
}

TerminalProfile handheld_profile() {
  TerminalProfile p;
  p.name = "handheld";
  p.carrier_f_ghz = 2.0;
  p.bandwidth_hz = 0.4e6;
  p.tx_power_dbm = 23.0;
  p.tx_antenna_gain_dbi = 0.0;
  p.atmospheric_loss_db = 0.1;
  p.shadow_margin_db = 3.0;
  p.scintillation_loss_db = 2.2;
  p.g_over_t_db_per_k = 1.1;
  return p;
}

TerminalProfile vsat_profile() {
  TerminalProfile p;
  p.name = "vsat";
  return p;
}

TerminalProfile profile_by_name(const std::string& name) {
  if (name == "handheld") return handheld_profile();
  if (name == "vsat") return vsat_profile();
  throw std::invalid_argument("unknown terminal profile '" + name + "'");
}

double fspl(double f_ghz, double d_km) {
  if (!(f_ghz > 0.0) || !(d_km > 0.0))
    throw std::domain_error("fspl: frequency and distance must be positive");
  return 20.0 * std::log10(f_ghz) + 20.0 * std::log10(d_km) + 92.45;
}

double cnr(const TerminalProfile& profile, double d_km) {
  return profile.eirp_dbw() - fspl(profile.carrier_f_ghz, d_km) - profile.atmospheric_loss_db -
         profile.shadow_margin_db - profile.scintillation_loss_db + profile.g_over_t_db_per_k -
         profile.boltzmann_dbw_per_k_per_hz - 10.0 * std::log10(profile.bandwidth_hz);
}

double rsrp_proxy(double dl_eirp_dbw, double d_km, double f_ghz, double shadowing_db) {
  return dl_eirp_dbw + 30.0 - fspl(f_ghz, d_km) + shadowing_db;
}

double l3_filter(double m_l3_prev, double m_l1, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("l3_filter: beta must be in (0, 1]");
  return beta * m_l1 + (1.0 - beta) * m_l3_prev;
}

double forgetting_factor(int k_iir) { return 1.0 / std::pow(2.0, k_iir / 4.0); }

MeasurementState::MeasurementState(std::size_t num_ues, std::size_t num_planes, int k_iir,
                                   double measurement_period_s, double a3_offset_db)
    : num_ues_(num_ues),
      num_planes_(num_planes),
      k_iir_(k_iir),
      beta_(forgetting_factor(k_iir)),
      measurement_period_s_(measurement_period_s),
      a3_offset_db_(a3_offset_db),
      l1_(num_ues * num_planes, 0.0),
      l3_(num_ues * num_planes, 0.0) {}

void MeasurementState::ingest(const std::vector<double>& l1_samples) {
  if (l1_samples.size() != l1_.size())
    throw std::invalid_argument("MeasurementState::ingest: sample count mismatch");
  l1_ = l1_samples;
  if (!initialized_) {
    l3_ = l1_samples;
    initialized_ = true;
    return;
  }
  for (std::size_t i = 0; i < l3_.size(); ++i) l3_[i] = l3_filter(l3_[i], l1_[i], beta_);
}

void MeasurementState::set_l3(std::size_t ue, std::size_t plane, double value) {
  l3_.at(ue * num_planes_ + plane) = value;
  initialized_ = true;
}

bool MeasurementState::a3(std::size_t ue, std::size_t target) const {
  return a3_event(l3(ue, 0), l3(ue, target), a3_offset_db_);
}

}  // namespace leoho::link
