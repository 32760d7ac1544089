public class Parse {
    static int parseOr(String s, int fallback) {
        int value;
        try {
            value = Integer.parseInt(s.trim());
        } catch (NumberFormatException e) {
            System.out.println("bad number: " + s);
            value = fallback;
        }
        return value * 2;
    }

    public static void main(String[] args) {
        System.out.println(parseOr(" 21 ", 0));
        System.out.println(parseOr("x", 5));
    }
}
