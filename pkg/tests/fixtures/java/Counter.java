public class Counter {
    private int value;
    private int step = 1;
    private boolean frozen;

    public Counter() {
        value = 0;
    }

    public Counter(int start) {
        value = start;
    }

    public int increment() {
        if (!frozen) {
            value += step;
        }
        return value;
    }

    public int decrement() {
        if (!frozen) {
            value -= step;
        }
        return value;
    }

    public void freeze() {
        frozen = true;
    }

    public int get() {
        return value;
    }

    public void reset() {
        value = 0;
        frozen = false;
    }

    public boolean isZero() {
        return value == 0;
    }

    public int incrementBy(int times) {
        int i = 0;
        while (i < times) {
            increment();
            i++;
        }
        return value;
    }

    public int findFirstMultiple(int k, int limit) {
        int found = -1;
        for (int i = 1; i <= limit; i++) {
            if (i % k == 0) {
                found = i;
                break;
            }
        }
        return found;
    }
}
