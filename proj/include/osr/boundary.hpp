#ifndef OSR_BOUNDARY_HPP
#define OSR_BOUNDARY_HPP

namespace osr {

// Symmetric (half-sample mirror) extension: -1 -> 0, -2 -> 1, n -> n-1,
// n+1 -> n-2. The shared boundary convention for convolution, patch
// extraction and resampling.
inline int mirror_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

} // namespace osr

#endif
