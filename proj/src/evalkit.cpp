#include "pslam/evalkit.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pslam/dataset_io.hpp"

namespace pslam {

std::vector<std::pair<size_t, size_t>> associate(const Trajectory& est, const Trajectory& gt,
                                                 double window) {
    std::vector<std::pair<size_t, size_t>> pairs;
    size_t j = 0;
    for (size_t i = 0; i < est.size(); ++i) {
        const double t = est.samples[i].timestamp;
        while (j + 1 < gt.size() &&
               std::abs(gt.samples[j + 1].timestamp - t) <= std::abs(gt.samples[j].timestamp - t))
            ++j;
        if (j < gt.size() && std::abs(gt.samples[j].timestamp - t) <= window) pairs.push_back({i, j});
    }
    return pairs;
}

RigidTransform align(const Trajectory& est, const Trajectory& gt) {
    const auto pairs = associate(est, gt);
    if (pairs.size() < 2) throw TooFewPairs();

    std::vector<Eigen::Vector3d> from, to;
    from.reserve(pairs.size());
    to.reserve(pairs.size());
    for (const auto& [i, j] : pairs) {
        from.push_back(est.samples[i].pose.translation);
        to.push_back(gt.samples[j].pose.translation);
    }
    return rigid_align(from, to);
}

double ate_rmse(const Trajectory& est, const Trajectory& gt) {
    const RigidTransform T = align(est, gt);
    const auto pairs = associate(est, gt);
    double sum = 0.0;
    for (const auto& [i, j] : pairs)
        sum += (T.apply(est.samples[i].pose.translation) - gt.samples[j].pose.translation)
                   .squaredNorm();
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

double rpe_rmse(const Trajectory& est, const Trajectory& gt, double delta) {
    const auto pairs = associate(est, gt);
    if (pairs.size() < 2) throw TooFewPairs();

    double sum = 0.0;
    size_t count = 0;
    size_t k = 0;
    for (size_t a = 0; a < pairs.size(); ++a) {
        const double target = est.samples[pairs[a].first].timestamp + delta;
        if (k <= a) k = a + 1;
        while (k + 1 < pairs.size() &&
               std::abs(est.samples[pairs[k + 1].first].timestamp - target) <=
                   std::abs(est.samples[pairs[k].first].timestamp - target))
            ++k;
        if (k >= pairs.size() ||
            std::abs(est.samples[pairs[k].first].timestamp - target) > 0.02)
            continue;
        const auto& [i0, j0] = pairs[a];
        const auto& [i1, j1] = pairs[k];
        const RigidTransform d_est =
            est.samples[i0].pose.inverse() * est.samples[i1].pose;
        const RigidTransform d_gt = gt.samples[j0].pose.inverse() * gt.samples[j1].pose;
        const RigidTransform err = d_gt.inverse() * d_est;
        sum += err.translation.squaredNorm() / (delta * delta);
        ++count;
    }
    if (count == 0) throw TooFewPairs();
    return std::sqrt(sum / static_cast<double>(count));
}

double segmentation_iou(const ByteImage& pred, const ByteImage& gt, const ByteImage* valid) {
    if (!pred.same_size(gt.width(), gt.height())) throw Error("mask dimensions differ");
    long inter = 0, uni = 0;
    for (int y = 0; y < pred.height(); ++y)
        for (int x = 0; x < pred.width(); ++x) {
            if (valid && valid->at(x, y) == 0) continue;
            const bool a = pred.at(x, y) != 0;
            const bool b = gt.at(x, y) != 0;
            inter += (a && b);
            uni += (a || b);
        }
    return uni == 0 ? (inter == 0 ? 1.0 : 0.0) : static_cast<double>(inter) / uni;
}

Trajectory read_tum_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trajectory file: " + path);
    Trajectory traj;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        double t, tx, ty, tz, qx, qy, qz, qw;
        if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
            throw ParseError(path + ": malformed TUM line " + std::to_string(line_no));
        Eigen::Quaterniond q(qw, qx, qy, qz);
        if (std::abs(q.norm() - 1.0) > 1e-3)
            throw ParseError(path + ": non-unit quaternion at line " + std::to_string(line_no));
        q.normalize();
        traj.push(t, RigidTransform(q.toRotationMatrix(), {tx, ty, tz}));
    }
    return traj;
}

void write_tum_trajectory(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open trajectory file for writing: " + path);
    out.precision(9);
    for (const auto& s : traj.samples) {
        Eigen::Quaterniond q(s.pose.rotation);
        if (q.w() < 0) q.coeffs() = -q.coeffs();
        const auto& t = s.pose.translation;
        out << s.timestamp << " " << t.x() << " " << t.y() << " " << t.z() << " " << q.x()
            << " " << q.y() << " " << q.z() << " " << q.w() << "\n";
    }
}

}  // namespace pslam
