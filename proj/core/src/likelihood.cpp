#include "hyptrack/likelihood.hpp"

#include "hyptrack/errors.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace hyptrack {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }
}  // namespace

ClutterModel ClutterModel::uniform(const SensorModel& sensor, double expected_count) {
    return {1.0 / fov_area(sensor), expected_count};
}

void ClutterModel::validate() const {
    if (!(density_value >= 0.0) || !std::isfinite(density_value))
        throw ConfigError("clutter.density_value", "must be finite and >= 0");
    if (!(expected_count >= 0.0) || !std::isfinite(expected_count))
        throw ConfigError("clutter.expected_count", "must be finite and >= 0");
}

void BirthModel::validate() const {
    if (!(velocity_std > 0.0)) throw ConfigError("birth.velocity_std", "must be > 0");
    if (!(mu >= 0.0)) throw ConfigError("birth.mu", "must be >= 0");
}

double birth_likelihood(const Measurement& z, const SensorModel& sensor) {
    if (!in_fov(z, sensor)) return 0.0;
    return 1.0 / fov_area(sensor);
}

GaussianTrack make_newborn(const Measurement& z, TrackLabel label, const SensorModel& sensor,
                           const BirthModel& birth) {
    GaussianTrack t;
    t.label = label;
    t.mean.head<2>() = z;
    const double r = z.norm();
    if (birth.mu > 0.0 && r > 0.0) {
        const double speed = std::sqrt(birth.mu / r);
        const Eigen::Vector2d tangent = Eigen::Vector2d(-z.y(), z.x()) / r;
        t.mean.tail<2>() = (birth.prograde ? speed : -speed) * tangent;
    } else {
        t.mean.tail<2>().setZero();
    }
    t.covariance.setZero();
    t.covariance.block<2, 2>(0, 0) = sensor.r;
    t.covariance.block<2, 2>(2, 2) = birth.velocity_std * birth.velocity_std * Eigen::Matrix2d::Identity();
    return t;
}

DataAssociationMatrix::DataAssociationMatrix(Eigen::MatrixXd log_entries, std::vector<TrackLabel> object_labels,
                                             std::vector<GaussianTrack> posteriors)
    : log_entries_(std::move(log_entries)),
      object_labels_(std::move(object_labels)),
      posteriors_(std::move(posteriors)) {
    if (log_entries_.rows() < 1 || log_entries_.cols() < 2) throw std::invalid_argument("matrix too small");
    if (static_cast<int>(object_labels_.size()) != num_objects())
        throw std::invalid_argument("object label count does not match matrix columns");
    if (!posteriors_.empty() &&
        posteriors_.size() != static_cast<std::size_t>(num_returns()) * static_cast<std::size_t>(num_objects()))
        throw std::invalid_argument("posterior count does not match matrix shape");
}

const GaussianTrack& DataAssociationMatrix::posterior(int row, int col) const {
    if (row < 0 || row >= num_returns() || col < 0 || col >= num_objects() || posteriors_.empty())
        throw std::out_of_range("no posterior stored for this matrix cell");
    return posteriors_[static_cast<std::size_t>(row) * static_cast<std::size_t>(num_objects()) +
                       static_cast<std::size_t>(col)];
}

DataAssociationMatrix build_matrix(std::span<const GaussianTrack> predicted, const MeasurementFrame& frame,
                                   const SensorModel& sensor, const ClutterModel& clutter,
                                   const BirthDeathConfig& birth_death) {
    const int m = static_cast<int>(frame.returns.size());
    const int M = static_cast<int>(predicted.size());
    Eigen::MatrixXd e(m + 1, M + 2);
    std::vector<TrackLabel> labels;
    labels.reserve(predicted.size());
    for (const auto& t : predicted) labels.push_back(t.label);

    std::vector<GaussianTrack> posteriors;
    posteriors.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(M));
    const double log_clutter = safe_log(clutter.density_value);
    for (int i = 0; i < m; ++i) {
        const Measurement& z = frame.returns[static_cast<std::size_t>(i)];
        for (int j = 0; j < M; ++j) {
            TrackUpdate u = update_track(predicted[static_cast<std::size_t>(j)], z, sensor);
            e(i, j) = u.log_likelihood;
            posteriors.push_back(std::move(u.track));
        }
        e(i, M) = safe_log(birth_likelihood(z, sensor));
        e(i, M + 1) = log_clutter;
    }
    for (int j = 0; j < M; ++j) e(m, j) = safe_log(birth_death.beta);
    e(m, M) = kNegInf;
    e(m, M + 1) = 0.0;
    return DataAssociationMatrix(std::move(e), std::move(labels), std::move(posteriors));
}

double hypothesis_log_likelihood(const AssociationEvent& event, const DataAssociationMatrix& matrix) {
    if (static_cast<int>(event.assignments.size()) != matrix.num_returns())
        throw std::invalid_argument("event length does not match matrix rows");
    double ll = 0.0;
    for (int i = 0; i < matrix.num_returns(); ++i) {
        const Assignment& a = event.assignments[static_cast<std::size_t>(i)];
        int col = 0;
        switch (a.kind) {
            case AssignmentKind::object:
                if (a.index >= static_cast<std::uint32_t>(matrix.num_objects()))
                    throw std::invalid_argument("assignment references a missing column");
                col = static_cast<int>(a.index);
                break;
            case AssignmentKind::birth: col = matrix.birth_column(); break;
            case AssignmentKind::clutter: col = matrix.clutter_column(); break;
        }
        ll += matrix.log_entry(i, col);
    }
    return std::isnan(ll) ? kNegInf : ll;
}

double MhtComparison::ratio() const { return std::exp(log_eta_hfisst - log_eta_mht); }

MhtComparison compare_mht_hfisst(const AssociationEvent& event, std::span<const GaussianTrack> predicted,
                                 const DataAssociationMatrix& matrix, const MeasurementFrame& frame,
                                 const SensorModel& sensor, const ClutterModel& clutter) {
    const int M = static_cast<int>(predicted.size());
    const int m = static_cast<int>(frame.returns.size());
    if (M != matrix.num_objects() || m != matrix.num_returns())
        throw std::invalid_argument("compare_mht_hfisst: tracks/frame do not match the matrix");
    validate_event(event, M, m);
    const EventCounts c = count_event(event);
    if (c.births() != 0 || c.deaths != 0)
        throw std::invalid_argument("compare_mht_hfisst: event must have no births or deaths");

    const int k = c.associated_objects;
    MhtComparison out;
    const double pd = sensor.p_d;
    out.log_eta_mht = (k > 0 ? k * std::log(pd) : 0.0) + (M - k > 0 ? (M - k) * std::log(1.0 - pd) : 0.0);
    for (int i = 0; i < m; ++i) {
        const Assignment& a = event.assignments[static_cast<std::size_t>(i)];
        if (a.kind == AssignmentKind::object) {
            const Measurement mean = predicted[a.index].mean.head<2>();
            out.log_eta_mht += gaussian_log_density(frame.returns[static_cast<std::size_t>(i)], mean, sensor.r);
        } else {
            out.log_eta_mht += safe_log(clutter.density_value);
        }
    }
    out.log_eta_hfisst = log_association_prior(M, m, k, pd) + hypothesis_log_likelihood(event, matrix);
    return out;
}

void write_matrix_csv(std::ostream& os, const DataAssociationMatrix& matrix) {
    os << "row";
    for (const auto& l : matrix.object_labels()) os << ",T" << l.value;
    os << ",B,C\n";
    const auto old_precision = os.precision(17);
    for (int i = 0; i <= matrix.num_returns(); ++i) {
        if (i == matrix.death_row()) {
            os << "DEATH";
        } else {
            os << "z" << i;
        }
        for (int j = 0; j < matrix.num_objects() + 2; ++j) os << ',' << matrix.log_entry(i, j);
        os << '\n';
    }
    os.precision(old_precision);
}

}  // namespace hyptrack
