#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sfis/fkpde.hpp"
#include "sfis/model.hpp"

namespace sfis {

enum class ControlKind { zero, averaged_suboptimal, full_oracle };

struct ControlOptions {
    double floorFrac = 1e-2;
    double uCap = 50.0;
};

// Feedback control u(t, x, y). The averaged kind reads the 1-d value grid
// and steers the slow coordinate only; the oracle kind reads a 2-d grid
// and steers both. Evaluations outside the grid clamp to the boundary and
// are counted, as are magnitude clamps at uCap.
class ControlField {
public:
    ControlKind kind() const { return kind_; }
    std::array<double, 2> at(double t, double x, double y) const;

    double floorValue() const { return floor_; }
    double cap() const { return opts_.uCap; }
    std::int64_t clampCount() const;
    std::int64_t outOfDomainCount() const;
    void resetCounters() const;

    friend ControlField make_zero_control();
    friend ControlField make_averaged_control(std::shared_ptr<const ValueGrid> grid,
                                              const ModelSpec& model,
                                              ControlOptions opts);
    friend ControlField make_oracle_control(std::shared_ptr<const ValueGrid2d> grid,
                                            const ModelSpec& model,
                                            ControlOptions opts);

private:
    struct Counters {
        std::atomic<std::int64_t> clamped{0};
        std::atomic<std::int64_t> outOfDomain{0};
    };

    ControlKind kind_ = ControlKind::zero;
    ControlOptions opts_;
    double beta_ = 1.0;
    double eps_ = 1.0;
    double floor_ = 0.0;
    std::function<double(double)> alpha1_;
    std::function<double(double, double)> alpha2_;
    std::shared_ptr<const ValueGrid> grid1_;
    std::shared_ptr<const ValueGrid2d> grid2_;
    std::shared_ptr<Counters> counters_ = std::make_shared<Counters>();
};

ControlField make_zero_control();
ControlField make_averaged_control(std::shared_ptr<const ValueGrid> grid,
                                   const ModelSpec& model, ControlOptions opts = {});
ControlField make_oracle_control(std::shared_ptr<const ValueGrid2d> grid,
                                 const ModelSpec& model, ControlOptions opts = {});

// CSV of (s, x, u1) triples over the product of the two node lists,
// evaluated at fixed y.
std::string control_surface_csv(const ControlField& field,
                                const std::vector<double>& times,
                                const std::vector<double>& xs, double y = 0.0);

}  // namespace sfis
