package printer;

public class Printer {
    public String describe(Point p) {
        return "point";
    }

    public String describe(Label l) {
        return "label";
    }

    public String origin() {
        return describe(new Point(0, 0));
    }

    public long countUp(long n) {
        long steps = 0;
        for (long i = 0; i < n; i++) {
            steps = steps + 1;
        }
        return steps;
    }

    public int mask(int flags) {
        return flags & 6;
    }
}
