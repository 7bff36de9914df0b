public class Arrays2 {
    public static int max(int[] xs) {
        int best = xs[0];
        for (int i = 1; i < xs.length; i++) {
            if (xs[i] > best) {
                best = xs[i];
            }
        }
        return best;
    }

    public static int indexOf(int[] xs, int target) {
        for (int i = 0; i < xs.length; i++) {
            if (xs[i] == target) {
                return i;
            }
        }
        return -1;
    }

    public static void swap(int[] xs, int i, int j) {
        int t = xs[i];
        xs[i] = xs[j];
        xs[j] = t;
    }

    public static void bubbleSort(int[] xs) {
        boolean swapped = true;
        while (swapped) {
            swapped = false;
            for (int i = 1; i < xs.length; i++) {
                if (xs[i - 1] > xs[i]) {
                    swap(xs, i - 1, i);
                    swapped = true;
                }
            }
        }
    }

    public static int binarySearch(int[] xs, int key) {
        int lo = 0;
        int hi = xs.length - 1;
        while (lo <= hi) {
            int mid = (lo + hi) >>> 1;
            if (xs[mid] < key) {
                lo = mid + 1;
            } else if (xs[mid] > key) {
                hi = mid - 1;
            } else {
                return mid;
            }
        }
        return -(lo + 1);
    }

    public static int[] copyOf(int[] xs, int n) {
        int[] out = new int[n];
        for (int i = 0; i < n && i < xs.length; i++) {
            out[i] = xs[i];
        }
        return out;
    }

    public static int[][] identity(int n) {
        int[][] m = new int[n][n];
        for (int i = 0; i < n; i++) {
            m[i][i] = 1;
        }
        return m;
    }

    public static long sum(int[] xs) {
        long s = 0;
        for (int x : xs) {
            s += x;
        }
        return s;
    }

    public static void reverse(int[] xs) {
        for (int i = 0, j = xs.length - 1; i < j; i++, j--) {
            swap(xs, i, j);
        }
    }

    public static int countPositive(int[] xs) {
        int n = 0;
        for (int x : xs) {
            if (x <= 0) {
                continue;
            }
            n++;
        }
        return n;
    }

    public static boolean contains(int[] xs, int v) {
        return indexOf(xs, v) >= 0;
    }
}
