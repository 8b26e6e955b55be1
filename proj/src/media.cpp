#include "cavity/media.hpp"
#include "cavity/errors.hpp"

#include <algorithm>
#include <sstream>

namespace cavity
{

void UnitSystem::validate() const
{
    if (!(lambda0_SI > 0.0) || !(tau0_SI > 0.0)) {
        throw Error(ErrorKind::invalid_geometry, "lambda0 and tau0 must be positive");
    }
}

LayerStack::LayerStack(double origin, std::vector<Layer> layers)
    : origin_(origin), layers_(std::move(layers))
{
    interfaces_.clear();
    interfaces_.reserve(layers_.size() + 1);
    interfaces_.push_back(origin_);
    double x = origin_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer &l = layers_[i];
        if (!(l.thickness > 0.0) || !(l.eps_r > 0.0) || !(l.mu_r > 0.0)) {
            std::ostringstream os;
            os << "layer " << i << " needs thickness, eps_r and mu_r > 0 (got " << l.thickness << ", "
               << l.eps_r << ", " << l.mu_r << ")";
            throw Error(ErrorKind::invalid_geometry, os.str());
        }
        x += l.thickness;
        interfaces_.push_back(x);
    }
}

int LayerStack::region_index(double x) const
{
    // interfaces_[i] is the left face of layer i; a point exactly on an
    // interface belongs to the layer on its right
    auto it = std::upper_bound(interfaces_.begin(), interfaces_.end(), x);
    return static_cast<int>(it - interfaces_.begin()) - 1;
}

Medium LayerStack::medium_in(int region) const
{
    if (region < 0 || region >= static_cast<int>(layers_.size())) {
        return Medium::vacuum();
    }
    return layers_[static_cast<std::size_t>(region)].medium();
}

double LayerStack::max_index() const
{
    double n = 1.0;
    for (const Layer &l : layers_) {
        n = std::max(n, l.index());
    }
    return n;
}

RegionSpec make_region(std::string name, double x_lo, double x_hi)
{
    if (!(x_lo < x_hi)) {
        throw Error(ErrorKind::invalid_geometry, "region " + name + " needs x_lo < x_hi");
    }
    return {std::move(name), x_lo, x_hi};
}

LayerStack build_fabry_perot(const FabryPerotSpec &spec)
{
    if (!(spec.n_r >= 1.0)) {
        throw Error(ErrorKind::invalid_geometry, "mirror index n_r must be >= 1");
    }
    if (!(spec.L_B > 0.0) || !(spec.L_A > 0.0) || !(spec.L_C > 0.0)) {
        throw Error(ErrorKind::invalid_geometry, "L_A, L_B and L_C must be positive");
    }
    const Layer mirror{spec.mirror_thickness(), spec.n_r * spec.n_r, 1.0};
    const Layer gap{spec.L_B, 1.0, 1.0};
    return LayerStack(spec.L_A, {mirror, gap, mirror});
}

std::vector<RegionSpec> default_regions(const LayerStack &stack, const FabryPerotSpec &spec)
{
    const auto &xs = stack.interfaces();
    if (xs.size() != 4) {
        throw Error(ErrorKind::invalid_geometry, "default regions need a two-mirror resonator stack");
    }
    const double a_hi = xs[0];
    const double b_lo = xs[1];
    const double b_hi = xs[2];
    const double c_lo = xs[3];
    return {
        make_region("A", a_hi - spec.L_A, a_hi),
        make_region("B", b_lo, b_hi),
        make_region("B'", b_lo, b_lo + 0.5 * (b_hi - b_lo)),
        make_region("C", c_lo, c_lo + spec.L_C),
    };
}

const RegionSpec *find_region(const std::vector<RegionSpec> &regions, const std::string &name)
{
    for (const RegionSpec &r : regions) {
        if (r.name == name) {
            return &r;
        }
    }
    return nullptr;
}

} // namespace cavity
