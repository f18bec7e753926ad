// Tabulates the Gaussian mean of 1 + z and its log-log second differences,
// then runs the convexity check below the critical radius.

#include <cstdio>

#include <gmeans/convexity.hpp>
#include <gmeans/function_spec.hpp>
#include <gmeans/integral_means.hpp>

int main()
{
    using namespace gmeans;
    const EntireFunction f = parse_function_spec("poly:1,1");
    const MeanParams params(2.0, -1.0);
    const double radius = corollary1_radius(params.alpha);
    std::printf("t0 = %.15f, critical radius for alpha = -1: %.12f\n", t0(), radius);

    const MeanProfile prof = radial_mean_profile(f, params, GeometricGrid(0.1, radius, 9));
    const auto sd = loglog_second_difference(prof, 1e-10);
    std::printf("%10s %14s %14s\n", "r", "mean", "d2 ln mean");
    for (std::size_t i = 0; i < prof.points.size(); ++i) {
        const auto& pt = prof.points[i];
        if (i == 0 || i + 1 == prof.points.size()) {
            std::printf("%10.5f %14.8f %14s\n", pt.r, pt.mean, "-");
        } else {
            std::printf("%10.5f %14.8f %14.6e\n", pt.r, pt.mean, sd[i - 1].value);
        }
    }
    std::printf("oracle shape: %s\n", std::string(to_string(classify(sd))).c_str());

    const CriterionReport rep = check_corollary1(f, params);
    std::printf("convexity below the critical radius: %s (%zu grid points)\n",
                std::string(to_string(rep.verdict)).c_str(), rep.points);
    return rep.verdict == Verdict::fails ? 1 : 0;
}
